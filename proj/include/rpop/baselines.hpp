#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rpop/care.hpp"

namespace rpop {

enum class BaselineMethod { Newton, MatrixSign, Sda, Schur };
std::string to_string(BaselineMethod m);

struct IterationTrace {
  BaselineMethod method = BaselineMethod::Newton;
  int iterations = 0;
  std::vector<double> residual_history;
  bool converged = false;
  std::optional<Eigen::MatrixXd> P;
  std::string reason;  // "converged", "iteration cap", "stagnation", ...
};

/// Solves F'Z + ZF + S = 0 for symmetric Z via the Kronecker linear system.
/// Throws when the Lyapunov operator is near singular.
Eigen::MatrixXd lyapunov_solve(const Eigen::MatrixXd& F, const Eigen::MatrixXd& S);

/// Newton-Kleinman iteration P_{k+1} = lyap(A - R P_k, Q + P_k R P_k).
IterationTrace newton_kleinman(const CareProblem& care, const Eigen::MatrixXd& P0,
                               int max_iter = 100000, double tol = 1e-10);

/// Plain Newton sign iteration with determinant scaling; exposed for tests.
Eigen::MatrixXd matrix_sign_of(const Eigen::MatrixXd& M, int max_iter = 100, double tol = 1e-12);

/// Matrix sign function method on the Hamiltonian [[A, -R], [-Q, -A']].
IterationTrace matrix_sign(const CareProblem& care, int max_iter = 100000, double tol = 1e-12);

/// Structure-preserving doubling with Cayley shift gamma (retry at 2.5 on a
/// singular pencil).
IterationTrace sda(const CareProblem& care, int max_iter = 100000, double tol = 1e-10,
                   double gamma = 1.0);

/// Stable invariant subspace of the Hamiltonian via a full eigendecomposition.
IterationTrace schur_method(const CareProblem& care);

}  // namespace rpop
