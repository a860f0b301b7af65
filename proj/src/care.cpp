#include "rpop/care.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace rpop {
namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kSolvedResidualTol = 1e-6;
constexpr double kSolvedPsdTol = 1e-8;

// Variable order: lower triangle (i,j), j <= i, row-major for the Cholesky
// factor; upper triangle (i,j), i <= j, row-major for symmetric P.
std::vector<std::pair<int, int>> triangle_positions(int n, bool lower) {
  std::vector<std::pair<int, int>> pos;
  for (int i = 0; i < n; ++i) {
    if (lower) {
      for (int j = 0; j <= i; ++j) pos.emplace_back(i, j);
    } else {
      for (int j = i; j < n; ++j) pos.emplace_back(i, j);
    }
  }
  return pos;
}

double draw_uniform(std::mt19937_64& rng, double low, double high) {
  // fixed 53-bit mapping so the sequence is bit-identical across platforms
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return low + (high - low) * u;
}

Polynomial draw_objective(ObjectiveSpec& obj, int l,
                          const std::vector<std::pair<int, int>>& pos) {
  if (!(obj.coeff_low > 0.0) || obj.coeff_high < obj.coeff_low) {
    throw std::invalid_argument("ObjectiveSpec: coefficient range must be positive");
  }
  std::mt19937_64 rng(obj.seed);
  obj.square_coeffs.clear();
  obj.cross_coeffs.clear();
  obj.linear_coeffs.clear();

  Polynomial f(l);
  for (int v = 0; v < l; ++v) {
    const double b = draw_uniform(rng, obj.coeff_low, obj.coeff_high);
    obj.square_coeffs.push_back(b);
    f += Polynomial::variable(l, v) * Polynomial::variable(l, v) * b;
  }
  // one coefficient per unordered pair of entries with distinct row and
  // distinct column indices
  for (int a = 0; a < l; ++a) {
    for (int b2 = a + 1; b2 < l; ++b2) {
      if (pos[a].first == pos[b2].first || pos[a].second == pos[b2].second) continue;
      const double c = draw_uniform(rng, obj.coeff_low, obj.coeff_high);
      obj.cross_coeffs.push_back(c);
      f += Polynomial::variable(l, a) * Polynomial::variable(l, b2) * c;
    }
  }
  for (int v = 0; v < l; ++v) {
    const double d = draw_uniform(rng, obj.coeff_low, obj.coeff_high);
    obj.linear_coeffs.push_back(d);
    f += Polynomial::variable(l, v) * d;
  }
  return f;
}

// entries of A'P + PA - PRP + Q as polynomials in the entries of P
PolyMatrix care_residual_matrix(const CareProblem& care, const PolyMatrix& P) {
  const int n = care.n;
  const int l = P.num_vars();
  PolyMatrix G(n, n, l);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Polynomial e = Polynomial::constant(l, care.Q(i, j));
      for (int k = 0; k < n; ++k) {
        e += P(k, j) * care.A(k, i);  // (A'P)_ij
        e += P(i, k) * care.A(k, j);  // (PA)_ij
      }
      G(i, j) = std::move(e);
    }
  }
  PolyMatrix PR(n, n, l);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Polynomial e(l);
      for (int k = 0; k < n; ++k) e += P(i, k) * care.R(k, j);
      PR(i, j) = std::move(e);
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) G(i, j) -= PR(i, k) * P(k, j);
    }
  }
  return G;
}

PolyMatrix cholesky_gram(int n, int l) {
  // X X' with X the lower-triangular variable matrix
  const auto pos = triangle_positions(n, /*lower=*/true);
  PolyMatrix X(n, n, l);
  for (int v = 0; v < l; ++v) X(pos[v].first, pos[v].second) = Polynomial::variable(l, v);
  PolyMatrix P(n, n, l);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Polynomial e(l);
      for (int k = 0; k < n; ++k) e += X(i, k) * X(j, k);
      P(i, j) = e;
      if (i != j) P(j, i) = std::move(e);
    }
  }
  return P;
}

PolyMatrix psd_variable_matrix(int n, int l) {
  const auto pos = triangle_positions(n, /*lower=*/false);
  PolyMatrix P(n, n, l);
  for (int v = 0; v < l; ++v) {
    P(pos[v].first, pos[v].second) = Polynomial::variable(l, v);
    P(pos[v].second, pos[v].first) = Polynomial::variable(l, v);
  }
  return P;
}

int side_from_vars(int l) {
  const int n = static_cast<int>(std::round((std::sqrt(8.0 * l + 1.0) - 1.0) / 2.0));
  if (n * (n + 1) / 2 != l) throw std::invalid_argument("variable count is not a triangle number");
  return n;
}

}  // namespace

std::string to_string(Formulation f) {
  return f == Formulation::Cholesky ? "cholesky" : "psd";
}

std::string to_string(CareVerdict v) {
  switch (v) {
    case CareVerdict::Solved: return "solved";
    case CareVerdict::Infeasible: return "infeasible";
    case CareVerdict::Indeterminate: return "indeterminate";
  }
  return "unknown";
}

CareProblem make_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& R,
                      const Eigen::MatrixXd& Q) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n || R.rows() != n || R.cols() != n || Q.rows() != n || Q.cols() != n) {
    throw std::invalid_argument("make_care: A, R, Q must be square of one size");
  }
  auto check = [&](const Eigen::MatrixXd& M, const char* name) {
    const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTol) {
      throw std::invalid_argument(std::string("make_care: ") + name + " is not symmetric");
    }
    return Eigen::MatrixXd(0.5 * (M + M.transpose()));
  };
  return CareProblem{n, A, check(R, "R"), check(Q, "Q")};
}

CareProblem build_care_from_lqr(const LqrProblem& lqr) {
  const int n = static_cast<int>(lqr.A.rows());
  if (lqr.A.cols() != n || lqr.B.rows() != n) throw std::invalid_argument("lqr: bad A/B dims");
  if (lqr.C.cols() != n) throw std::invalid_argument("lqr: bad C dims");
  const int m = static_cast<int>(lqr.B.cols());
  if (lqr.W.rows() != m || lqr.W.cols() != m) throw std::invalid_argument("lqr: bad W dims");
  if ((lqr.W - lqr.W.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol) {
    throw std::invalid_argument("lqr: W must be symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(lqr.W);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("lqr: W must be positive definite");
  }
  Eigen::MatrixXd R = lqr.B * llt.solve(lqr.B.transpose());
  R = 0.5 * (R + R.transpose());
  Eigen::MatrixXd Q = lqr.C.transpose() * lqr.C;
  Q = 0.5 * (Q + Q.transpose());
  return CareProblem{n, lqr.A, std::move(R), std::move(Q)};
}

Eigen::MatrixXd feedback_gain(const LqrProblem& lqr, const Eigen::MatrixXd& P) {
  if (P.rows() != lqr.A.rows() || P.cols() != lqr.A.rows()) {
    throw std::invalid_argument("feedback_gain: P dimension mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(lqr.W);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("feedback_gain: singular W");
  return llt.solve(lqr.B.transpose() * P);
}

PopProblem formulate_cholesky(const CareProblem& care, ObjectiveSpec& obj) {
  const int n = care.n;
  const int l = n * (n + 1) / 2;
  const auto pos = triangle_positions(n, /*lower=*/true);

  PopProblem pop;
  pop.num_vars = l;
  const PolyMatrix G = care_residual_matrix(care, cholesky_gram(n, l));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) pop.equalities.push_back(G(i, j));
  }
  const auto X = triangle_positions(n, true);
  for (int i = 0; i < n; ++i) {
    // diagonal entries X_ii
    for (int v = 0; v < l; ++v) {
      if (X[v].first == i && X[v].second == i) {
        pop.inequalities.push_back(Polynomial::variable(l, v));
      }
    }
  }
  pop.objective = draw_objective(obj, l, pos);
  return pop;
}

PopProblem formulate_psd(const CareProblem& care, ObjectiveSpec& obj) {
  const int n = care.n;
  const int l = n * (n + 1) / 2;
  const auto pos = triangle_positions(n, /*lower=*/false);

  PopProblem pop;
  pop.num_vars = l;
  const PolyMatrix P = psd_variable_matrix(n, l);
  const PolyMatrix G = care_residual_matrix(care, P);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) pop.equalities.push_back(G(i, j));
  }
  pop.matrix_ineq = P;
  pop.objective = draw_objective(obj, l, pos);
  return pop;
}

PopProblem add_ball_constraint(PopProblem pop, const UpperBound& bound, Formulation formulation) {
  const int l = pop.num_vars;
  const int n = side_from_vars(l);
  if (bound.P_u.rows() != n || bound.P_u.cols() != n) {
    throw std::invalid_argument("add_ball_constraint: bound dimension mismatch");
  }
  const double pu_sq = bound.P_u.squaredNorm();
  const PolyMatrix P = formulation == Formulation::Cholesky ? cholesky_gram(n, l)
                                                            : psd_variable_matrix(n, l);
  Polynomial ball = Polynomial::constant(l, pu_sq);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) ball -= P(i, j) * P(i, j);
  }
  pop.inequalities.push_back(std::move(ball));
  return pop;
}

double care_residual(const CareProblem& care, const Eigen::MatrixXd& P) {
  if (P.rows() != care.n || P.cols() != care.n) {
    throw std::invalid_argument("care_residual: P dimension mismatch");
  }
  return (care.A.transpose() * P + P * care.A - P * care.R * P + care.Q).norm();
}

bool stability_check(const CareProblem& care, const Eigen::MatrixXd& P, double stab_tol) {
  const Eigen::VectorXcd eig = (care.A - care.R * P).eigenvalues();
  for (int i = 0; i < eig.size(); ++i) {
    if (eig[i].real() >= -stab_tol) return false;
  }
  return true;
}

CareOutcome solve_care(const CareProblem& care, Formulation formulation, ObjectiveSpec obj,
                       const std::optional<UpperBound>& bound, HierarchyParams params) {
  const auto t0 = std::chrono::steady_clock::now();
  const bool chol = formulation == Formulation::Cholesky;

  PopProblem pop = chol ? formulate_cholesky(care, obj) : formulate_psd(care, obj);
  if (bound) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(bound->P_u, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) {
      throw std::invalid_argument("solve_care: upper bound P_u must be PSD");
    }
    pop = add_ball_constraint(std::move(pop), *bound, formulation);
  }

  const int step = chol ? 2 : 1;
  params.k_start = std::max(params.k_start, chol ? 2 : 1);
  if (params.k_max <= 0) params.k_max = chol ? 4 : 3;

  CareOutcome out;
  out.formulation = formulation;
  out.objective = obj;
  out.relaxation = solve_pop(pop, params, step);
  out.order = out.relaxation.order;

  const int n = care.n;
  const auto pos = triangle_positions(n, /*lower=*/!chol ? false : true);
  if (out.relaxation.status == SdpStatus::PrimalInfeasible) {
    out.verdict = CareVerdict::Infeasible;
  } else if (out.relaxation.status == SdpStatus::Optimal && !out.relaxation.minimizers.empty()) {
    double best_res = std::numeric_limits<double>::infinity();
    double best_norm = std::numeric_limits<double>::infinity();
    for (const auto& v : out.relaxation.minimizers) {
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
      for (int idx = 0; idx < static_cast<int>(pos.size()); ++idx) {
        T(pos[idx].first, pos[idx].second) = v[idx];
      }
      Eigen::MatrixXd P;
      if (chol) {
        P = T * T.transpose();
      } else {
        P = T;
        for (int i = 0; i < n; ++i) {
          for (int j = i + 1; j < n; ++j) P(j, i) = P(i, j);
        }
      }
      out.all_solutions.push_back(P);
      const double res = care_residual(care, P);
      const double norm = P.norm();
      if (res < best_res || (res == best_res && norm < best_norm)) {
        best_res = res;
        best_norm = norm;
        out.P = P;
        out.solution_point = v;
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.P, Eigen::EigenvaluesOnly);
    out.residual_norm = best_res;
    if (best_res <= kSolvedResidualTol && es.eigenvalues().minCoeff() >= -kSolvedPsdTol) {
      out.verdict = CareVerdict::Solved;
      out.stabilizing = stability_check(care, out.P);
    } else {
      out.verdict = CareVerdict::Indeterminate;
      out.relaxation.message = "extracted minimizer fails the residual or psd gate";
    }
  } else {
    out.verdict = CareVerdict::Indeterminate;
  }

  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace rpop
