#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rpop/lasserre.hpp"

namespace rpop {

/// A'P + PA - PRP + Q = 0 with R, Q symmetric.
struct CareProblem {
  int n = 0;
  Eigen::MatrixXd A, R, Q;
};

/// Validates dimensions and symmetry (asymmetry <= 1e-12 is symmetrized
/// away, anything larger is rejected).
CareProblem make_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& R,
                      const Eigen::MatrixXd& Q);

/// x' = Ax + Bu, y = Cx, cost integral of x'Qx + u'Wu with Q = C'C.
struct LqrProblem {
  Eigen::MatrixXd A, B, C, W;
};

/// Seeded draw of the positive objective coefficients; regenerating from the
/// same seed is bit-identical, and the drawn values are recorded here.
struct ObjectiveSpec {
  uint64_t seed = 20240501;
  double coeff_low = 1.0;
  double coeff_high = 2.0;
  std::vector<double> square_coeffs;  // b, per variable in canonical order
  std::vector<double> cross_coeffs;   // c, per unordered variable pair drawn
  std::vector<double> linear_coeffs;  // d, per variable
};

struct UpperBound {
  Eigen::MatrixXd P_u;  // symmetric PSD
  std::string source;
};

enum class Formulation { Cholesky, Psd };
std::string to_string(Formulation f);

enum class CareVerdict { Solved, Infeasible, Indeterminate };
std::string to_string(CareVerdict v);

struct CareOutcome {
  CareVerdict verdict = CareVerdict::Indeterminate;
  Formulation formulation = Formulation::Cholesky;
  Eigen::MatrixXd P;           // when Solved
  double residual_norm = 0.0;  // when Solved
  bool stabilizing = false;
  int order = 0;  // certifying order, or the last order attempted
  Eigen::VectorXd solution_point;             // raw minimizer (X or P entries)
  std::vector<Eigen::MatrixXd> all_solutions;  // every extracted candidate
  ObjectiveSpec objective;
  RelaxationResult relaxation;
  double wall_seconds = 0.0;
};

// R = B W^{-1} B', Q = C'C; W must be positive definite.
CareProblem build_care_from_lqr(const LqrProblem& lqr);

// L* = W^{-1} B' P.
Eigen::MatrixXd feedback_gain(const LqrProblem& lqr, const Eigen::MatrixXd& P);

/// Variables are the n(n+1)/2 lower-triangle entries of the Cholesky factor
/// X (row-major); equalities are the lower-triangle entries of
/// A'XX' + XX'A - XX'RXX' + Q; inequalities are the diagonal entries of X.
/// Draws and records the objective coefficients into `obj`.
PopProblem formulate_cholesky(const CareProblem& care, ObjectiveSpec& obj);

/// Variables are the upper-triangle entries of symmetric P (row-major);
/// equalities are the upper-triangle entries of A'P + PA - PRP + Q; the
/// matrix inequality is P itself.
PopProblem formulate_psd(const CareProblem& care, ObjectiveSpec& obj);

/// Appends ||P_u||_F^2 - ||XX'||_F^2 >= 0 (Cholesky) or
/// ||P_u||_F^2 - ||P||_F^2 >= 0 (PSD) to the inequalities.
PopProblem add_ball_constraint(PopProblem pop, const UpperBound& bound, Formulation formulation);

// ||A'P + PA - PRP + Q||_F.
double care_residual(const CareProblem& care, const Eigen::MatrixXd& P);

// true iff every eigenvalue of A - RP has real part < -stab_tol.
bool stability_check(const CareProblem& care, const Eigen::MatrixXd& P, double stab_tol = 1e-9);

/// Formulates, runs the hierarchy (step 2 / k_start 2 for Cholesky, step 1 /
/// k_start 1 for PSD), reconstructs P from the extracted minimizers, and
/// maps a certified infeasibility to the nonexistence verdict.
CareOutcome solve_care(const CareProblem& care, Formulation formulation, ObjectiveSpec obj,
                       const std::optional<UpperBound>& bound, HierarchyParams params);

}  // namespace rpop
