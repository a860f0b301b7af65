#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rpop/moment.hpp"
#include "rpop/poly.hpp"
#include "rpop/sdp.hpp"

namespace rpop {

/// Polynomial optimization problem: minimize objective subject to
/// equalities = 0, inequalities >= 0, matrix_ineq >= 0 (PSD).
struct PopProblem {
  int num_vars = 0;
  Polynomial objective;
  std::vector<Polynomial> equalities;
  std::vector<Polynomial> inequalities;
  std::optional<PolyMatrix> matrix_ineq;

  int max_constraint_degree() const;
};

struct HierarchyParams {
  int k_start = 1;
  int k_max = 4;
  double rank_tol = 1e-6;
  double extraction_tol = 1e-6;
  // Orders whose tms would exceed this many scalars are not assembled; the
  // run stops as indeterminate instead of thrashing.
  int max_relaxation_scalars = 6000;
  SdpTolerances sdp;
};

struct OrderLog {
  int k = 0;
  SdpStatus status = SdpStatus::Indeterminate;
  double lower_bound = 0.0;  // NaN unless solved
  std::vector<int> moment_ranks;  // ranks of M_0..M_k when solved
  int sdp_iterations = 0;
};

struct RelaxationResult {
  int order = 0;
  SdpStatus status = SdpStatus::Indeterminate;
  double lower_bound = 0.0;  // NaN unless some order solved
  std::optional<Tms> tms;
  std::optional<int> flat_at;
  std::vector<Eigen::VectorXd> minimizers;
  std::optional<InfeasibilityCertificate> certificate;
  std::vector<OrderLog> log;
  std::string message;
};

/// Builds the order-k moment relaxation: scalars are the tms over N^l_{2k},
/// one PSD moment block, one zero group per equality, one PSD localizing
/// block per inequality, one block-localizing PSD block for matrix_ineq,
/// y_0 = 1.
SdpProblem assemble_relaxation(const PopProblem& pop, int k);

/// Smallest t with step <= t <= k and rank M_t(y) = rank M_{t-step}(y).
std::optional<int> flat_truncation_check(const Tms& y, int k, int step, double rank_tol);

/// Minimizer extraction from a flat tms: rank-revealing factorization of
/// M_t, column-echelon basis selection, multiplication matrices, and a
/// seeded random-combination Schur diagonalization.  Returns an empty list
/// when the echelon basis is ill-conditioned (caller escalates the order).
std::vector<Eigen::VectorXd> extract_minimizers(const Tms& y, int t, double rank_tol);

/// The increasing-order loop shared by the two formulations: solve the
/// relaxation at k, stop on a certified infeasibility, otherwise look for
/// flat truncation from `step` upward and extract; escalate k on failure.
RelaxationResult solve_pop(const PopProblem& pop, const HierarchyParams& params, int step);

}  // namespace rpop
