#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace rpop {

/// One entry of a symmetric coefficient matrix; only row <= col is stored.
struct MatrixEntry {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Affine symmetric-matrix map F0 + sum_i u_i F_i required PSD.
/// `constant` holds F0, `terms[i]` holds the entries of F_i (possibly empty).
struct SdpBlock {
  int dim = 0;
  std::vector<MatrixEntry> constant;
  std::vector<std::vector<MatrixEntry>> terms;  // indexed by scalar
};

/// Affine scalar map constant + sum coeff_i * u_i.
struct AffineScalar {
  double constant = 0.0;
  std::vector<std::pair<int, double>> terms;

  double evaluate(const Eigen::VectorXd& u) const;
};

/// Block-diagonal conic program over a scalar vector u:
///   minimize  objective(u)
///   s.t.      every block map is PSD,
///             every zero constraint evaluates to 0,
///             u[normalization] = 1 when set.
struct SdpProblem {
  int num_scalars = 0;
  std::vector<SdpBlock> blocks;
  std::vector<AffineScalar> zero_constraints;
  AffineScalar objective;
  std::optional<int> normalization;

  // Self-describing text dump (block sizes, constraint counts) for debugging.
  std::string describe() const;
};

enum class SdpStatus { Optimal, PrimalInfeasible, DualInfeasible, Indeterminate };

std::string to_string(SdpStatus status);

struct SdpTolerances {
  double feas_tol = 1e-8;
  double gap_tol = 1e-8;
  double cert_tol = 1e-7;
  int max_iterations = 200;
  int max_total_block_dim = 2000;
  double step_fraction = 0.98;  // fraction-to-boundary
};

/// Improving-ray data proving primal infeasibility: multipliers (y, Z) with
/// Z_j >= 0, sum_r y_r A_r = sum_j <F_ji, Z_j> componentwise, and
/// b'y + sum_j <F_j0, Z_j> < 0.  eq_dual is aligned with zero_constraints,
/// followed by one multiplier for the normalization row when present.
struct InfeasibilityCertificate {
  Eigen::VectorXd eq_dual;
  std::vector<Eigen::MatrixXd> block_dual;
};

struct CertificateCheck {
  bool valid = false;
  double violation = 0.0;   // -(b'y + h'z) after unit normalization
  double residual = 0.0;    // ||A'y + G'z||_inf, data-scaled
  double min_eigenvalue = 0.0;
};

struct SdpResiduals {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::Indeterminate;
  Eigen::VectorXd primal;  // scalar vector u, when available
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  std::optional<InfeasibilityCertificate> certificate;  // PrimalInfeasible
  std::optional<Eigen::VectorXd> improving_ray;         // DualInfeasible
  int iterations = 0;
  SdpResiduals residuals;
  std::vector<double> merit_history;  // per-iteration progress measure
  std::string message;
};

/// Interior-point solve on the homogeneous self-dual embedding.
SdpSolution solve_sdp(const SdpProblem& prob, const SdpTolerances& opts = {});

/// Recomputes the improving-ray conditions from the returned data.
CertificateCheck verify_infeasibility_certificate(const SdpProblem& prob,
                                                  const InfeasibilityCertificate& cert,
                                                  double cert_tol);

/// Recomputes feasibility residuals and objective of a candidate primal
/// vector, using the same formulas the solver reports.
SdpResiduals recompute_residuals(const SdpProblem& prob, const Eigen::VectorXd& primal,
                                 double dual_objective);

}  // namespace rpop
