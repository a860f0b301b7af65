#include "rpop/lasserre.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace rpop {
namespace {

constexpr uint64_t kExtractionSeed = 20240501;

int ceil_half(int d) { return (d + 1) / 2; }

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

int PopProblem::max_constraint_degree() const {
  int d = 0;
  for (const auto& g : equalities) d = std::max(d, g.degree());
  for (const auto& h : inequalities) d = std::max(d, h.degree());
  if (matrix_ineq) d = std::max(d, matrix_ineq->max_degree());
  return d;
}

SdpProblem assemble_relaxation(const PopProblem& pop, int k) {
  if (pop.num_vars < 1) throw std::invalid_argument("assemble_relaxation: no variables");
  if (2 * k < pop.max_constraint_degree() || 2 * k < pop.objective.degree()) {
    throw std::invalid_argument("assemble_relaxation: relaxation order too small");
  }
  if (pop.matrix_ineq && !pop.matrix_ineq->is_symmetric()) {
    throw std::invalid_argument("assemble_relaxation: matrix inequality must be symmetric");
  }
  const int l = pop.num_vars;
  const MonomialBasis full(l, 2 * k);

  SdpProblem sdp;
  sdp.num_scalars = full.size();
  sdp.normalization = 0;  // the unit monomial is first in graded-lex order

  for (const auto& [m, c] : pop.objective.terms()) {
    sdp.objective.terms.emplace_back(full.index_of(m), c);
  }

  // moment block M_k(y)
  {
    const MonomialBasis bk(l, k);
    SdpBlock blk;
    blk.dim = bk.size();
    blk.terms.resize(sdp.num_scalars);
    for (int i = 0; i < bk.size(); ++i) {
      for (int j = i; j < bk.size(); ++j) {
        blk.terms[full.index_of(bk.at(i) * bk.at(j))].push_back({i, j, 1.0});
      }
    }
    sdp.blocks.push_back(std::move(blk));
  }

  // one zero group per equality: L_y(g * x^gamma) = 0 over the distinct
  // products gamma, which is the entry set of the zero localizing matrix
  for (const auto& g : pop.equalities) {
    if (g.is_zero()) continue;
    const MonomialBasis bg(l, 2 * (k - ceil_half(g.degree())));
    for (int t = 0; t < bg.size(); ++t) {
      AffineScalar row;
      for (const auto& [m, c] : g.terms()) {
        row.terms.emplace_back(full.index_of(bg.at(t) * m), c);
      }
      sdp.zero_constraints.push_back(std::move(row));
    }
  }

  // one PSD localizing block per scalar inequality
  for (const auto& h : pop.inequalities) {
    const MonomialBasis bh(l, k - ceil_half(h.degree()));
    SdpBlock blk;
    blk.dim = bh.size();
    blk.terms.resize(sdp.num_scalars);
    for (int i = 0; i < bh.size(); ++i) {
      for (int j = i; j < bh.size(); ++j) {
        const Monomial prod = bh.at(i) * bh.at(j);
        for (const auto& [m, c] : h.terms()) {
          blk.terms[full.index_of(prod * m)].push_back({i, j, c});
        }
      }
    }
    sdp.blocks.push_back(std::move(blk));
  }

  // block localizing matrix for the polynomial matrix inequality
  if (pop.matrix_ineq) {
    const PolyMatrix& H = *pop.matrix_ineq;
    const MonomialBasis bh(l, k - ceil_half(H.max_degree()));
    const int nb = bh.size();
    SdpBlock blk;
    blk.dim = H.rows() * nb;
    blk.terms.resize(sdp.num_scalars);
    for (int bi = 0; bi < H.rows(); ++bi) {
      for (int bj = bi; bj < H.cols(); ++bj) {
        for (int i = 0; i < nb; ++i) {
          for (int j = 0; j < nb; ++j) {
            const int r = bi * nb + i, c = bj * nb + j;
            if (r > c) continue;
            const Monomial prod = bh.at(i) * bh.at(j);
            for (const auto& [m, cf] : H(bi, bj).terms()) {
              blk.terms[full.index_of(prod * m)].push_back({r, c, cf});
            }
          }
        }
      }
    }
    sdp.blocks.push_back(std::move(blk));
  }

  return sdp;
}

std::optional<int> flat_truncation_check(const Tms& y, int k, int step, double rank_tol) {
  if (step != 1 && step != 2) throw std::invalid_argument("flat_truncation_check: step must be 1 or 2");
  for (int t = step; t <= k; ++t) {
    if (2 * t > y.degree()) break;
    const int r_hi = numerical_rank(moment_matrix(y, t), rank_tol);
    const int r_lo = numerical_rank(moment_matrix(y, t - step), rank_tol);
    if (r_hi == r_lo) return t;
  }
  return std::nullopt;
}

std::vector<Eigen::VectorXd> extract_minimizers(const Tms& y, int t, double rank_tol) {
  const int l = y.num_vars();
  const Eigen::MatrixXd M = moment_matrix(y, t);
  const MonomialBasis bt(l, t);
  const int N = bt.size();
  const int r = numerical_rank(M, rank_tol);
  if (r == 0) return {};

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.eigenvalues()(N - r) <= 0.0) return {};  // top-r part not positive
  Eigen::MatrixXd F(N, r);
  for (int j = 0; j < r; ++j) {
    const int src = N - 1 - j;  // eigenvalues ascend; take the largest r
    F.col(j) = es.eigenvectors().col(src) * std::sqrt(es.eigenvalues()(src));
  }

  // column echelon over the monomial order: E = rref(F'), pivots become the
  // basis monomials
  Eigen::MatrixXd E = F.transpose();
  const double pivot_tol = 1e-8 * std::max(1.0, E.cwiseAbs().maxCoeff());
  std::vector<int> pivots;
  int row = 0;
  for (int col = 0; col < N && row < r; ++col) {
    int arg = -1;
    double best = pivot_tol;
    for (int i = row; i < r; ++i) {
      if (std::abs(E(i, col)) > best) {
        best = std::abs(E(i, col));
        arg = i;
      }
    }
    if (arg < 0) continue;
    E.row(arg).swap(E.row(row));
    E.row(row) /= E(row, col);
    for (int i = 0; i < r; ++i) {
      if (i != row && E(i, col) != 0.0) E.row(i) -= E(i, col) * E.row(row);
    }
    pivots.push_back(col);
    ++row;
  }
  if (row < r) return {};  // ill-conditioned echelon basis

  // flatness places the pivot monomials below degree t, so x_i * basis stays
  // inside the degree-t enumeration
  for (int p : pivots) {
    if (bt.at(p).degree() >= t && t > 0) return {};
  }

  // multiplication matrices per variable
  std::vector<Eigen::MatrixXd> mult(l, Eigen::MatrixXd(r, r));
  for (int v = 0; v < l; ++v) {
    for (int j = 0; j < r; ++j) {
      const Monomial shifted = bt.at(pivots[j]) * Monomial::variable(l, v);
      mult[v].col(j) = E.col(bt.index_of(shifted));
    }
  }

  // seeded random convex combination, then one ordered Schur basis
  // simultaneously triangularizes the commuting family
  std::mt19937_64 rng(kExtractionSeed);
  Eigen::VectorXd w(l);
  for (int v = 0; v < l; ++v) w[v] = static_cast<double>(rng() >> 11) * 0x1.0p-53 + 0.1;
  w /= w.sum();
  Eigen::MatrixXd Nc = Eigen::MatrixXd::Zero(r, r);
  for (int v = 0; v < l; ++v) Nc += w[v] * mult[v];

  Eigen::RealSchur<Eigen::MatrixXd> schur(Nc);
  if (schur.info() != Eigen::Success) return {};
  const Eigen::MatrixXd& T = schur.matrixT();
  const Eigen::MatrixXd& Q = schur.matrixU();
  const double offdiag_tol = 1e-7 * std::max(1.0, T.cwiseAbs().maxCoeff());
  for (int j = 0; j + 1 < r; ++j) {
    if (std::abs(T(j + 1, j)) > offdiag_tol) return {};  // complex pair: no real atoms
  }

  std::vector<Eigen::VectorXd> points;
  points.reserve(r);
  for (int j = 0; j < r; ++j) {
    Eigen::VectorXd v(l);
    for (int i = 0; i < l; ++i) v[i] = Q.col(j).dot(mult[i] * Q.col(j));
    points.push_back(std::move(v));
  }
  return points;
}

namespace {

bool point_feasible(const PopProblem& pop, const Eigen::VectorXd& v, double tol) {
  for (const auto& g : pop.equalities) {
    if (std::abs(g.evaluate(v)) > tol) return false;
  }
  for (const auto& h : pop.inequalities) {
    if (h.evaluate(v) < -tol) return false;
  }
  if (pop.matrix_ineq) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pop.matrix_ineq->evaluate(v),
                                                      Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol) return false;
  }
  return true;
}

}  // namespace

RelaxationResult solve_pop(const PopProblem& pop, const HierarchyParams& params, int step) {
  if (step != 1 && step != 2) throw std::invalid_argument("solve_pop: step must be 1 or 2");
  const int k_min = std::max(1, ceil_half(std::max(pop.max_constraint_degree(),
                                                   pop.objective.degree())));
  if (params.k_start < k_min) throw std::invalid_argument("solve_pop: k_start below minimal order");
  if (params.k_max < params.k_start) throw std::invalid_argument("solve_pop: k_max < k_start");

  RelaxationResult out;
  out.lower_bound = std::numeric_limits<double>::quiet_NaN();

  for (int k = params.k_start; k <= params.k_max; ++k) {
    out.order = k;
    const double scalars = binomial(pop.num_vars + 2 * k, 2 * k);
    if (scalars > params.max_relaxation_scalars) {
      out.status = SdpStatus::Indeterminate;
      std::ostringstream os;
      os << "order " << k << " needs " << static_cast<long long>(scalars)
         << " tms scalars, above the cap " << params.max_relaxation_scalars;
      out.message = os.str();
      return out;
    }

    const SdpProblem sdp = assemble_relaxation(pop, k);
    const SdpSolution sol = solve_sdp(sdp, params.sdp);

    OrderLog log;
    log.k = k;
    log.status = sol.status;
    log.lower_bound = sol.primal_objective;
    log.sdp_iterations = sol.iterations;

    if (sol.status == SdpStatus::PrimalInfeasible) {
      out.log.push_back(std::move(log));
      out.status = SdpStatus::PrimalInfeasible;
      out.certificate = sol.certificate;
      out.message = sol.message;
      return out;
    }
    if (sol.status == SdpStatus::Indeterminate) {
      out.log.push_back(std::move(log));
      out.status = SdpStatus::Indeterminate;
      out.message = "sdp indeterminate at order " + std::to_string(k) + ": " + sol.message;
      return out;
    }
    if (sol.status == SdpStatus::DualInfeasible) {
      // unbounded relaxation: deeper localization can still bound it
      out.log.push_back(std::move(log));
      continue;
    }

    // Optimal
    out.status = SdpStatus::Optimal;
    out.lower_bound = sol.primal_objective;
    Tms y(pop.num_vars, 2 * k);
    y.values() = sol.primal;
    for (int tt = 0; tt <= k; ++tt) {
      log.moment_ranks.push_back(numerical_rank(moment_matrix(y, tt), params.rank_tol));
    }

    for (int t = step; t <= k; ++t) {
      if (log.moment_ranks[t] != log.moment_ranks[t - step]) continue;
      auto pts = extract_minimizers(y, t, params.rank_tol);
      std::erase_if(pts, [&](const Eigen::VectorXd& v) {
        return !point_feasible(pop, v, params.extraction_tol);
      });
      if (!pts.empty()) {
        out.flat_at = t;
        out.minimizers = std::move(pts);
        out.tms = std::move(y);
        out.log.push_back(std::move(log));
        return out;
      }
    }
    out.tms = std::move(y);
    out.log.push_back(std::move(log));
  }

  if (out.status != SdpStatus::Optimal) {
    out.status = SdpStatus::Indeterminate;
  } else {
    // relaxations solved but never went flat within the order cap
    out.status = SdpStatus::Indeterminate;
    out.message = "no flat truncation up to k_max " + std::to_string(params.k_max);
  }
  return out;
}

}  // namespace rpop
