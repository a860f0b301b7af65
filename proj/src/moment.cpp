#include "rpop/moment.hpp"

#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace rpop {
namespace {

void append_monomials_of_degree(int num_vars, int degree, std::vector<int>& work, int var,
                                std::vector<Monomial>& out) {
  if (var == num_vars - 1) {
    work[var] = degree;
    out.emplace_back(work);
    return;
  }
  for (int e = degree; e >= 0; --e) {
    work[var] = e;
    append_monomials_of_degree(num_vars, degree - e, work, var + 1, out);
  }
}

}  // namespace

MonomialBasis::MonomialBasis(int num_vars, int degree_bound)
    : num_vars_(num_vars), degree_bound_(degree_bound) {
  if (num_vars < 1) throw std::invalid_argument("MonomialBasis: need at least one variable");
  if (degree_bound < 0) throw std::invalid_argument("MonomialBasis: negative degree bound");
  std::vector<int> work(num_vars, 0);
  for (int d = 0; d <= degree_bound; ++d) {
    append_monomials_of_degree(num_vars, d, work, 0, list_);
  }
  for (int i = 0; i < static_cast<int>(list_.size()); ++i) index_.emplace(list_[i], i);
}

int MonomialBasis::index_of(const Monomial& m) const {
  auto it = index_.find(m);
  if (it == index_.end()) throw std::out_of_range("MonomialBasis: monomial beyond degree bound");
  return it->second;
}

MonomialBasis enumerate_basis(int num_vars, int degree_bound) {
  return MonomialBasis(num_vars, degree_bound);
}

Tms::Tms(int num_vars, int degree)
    : basis_(num_vars, degree), values_(Eigen::VectorXd::Zero(basis_.size())) {}

Tms point_tms(const Eigen::VectorXd& v, int degree) {
  Tms y(static_cast<int>(v.size()), degree);
  const auto& list = y.basis().list();
  for (int i = 0; i < y.basis().size(); ++i) y.values()[i] = list[i].evaluate(v);
  return y;
}

double riesz(const Tms& y, const Polynomial& f) {
  if (f.num_vars() != y.num_vars()) throw std::invalid_argument("riesz: variable count mismatch");
  if (f.degree() > y.degree()) throw std::invalid_argument("riesz: polynomial degree exceeds tms degree");
  double r = 0.0;
  for (const auto& [m, c] : f.terms()) r += c * y.value(m);
  return r;
}

Eigen::MatrixXd moment_matrix(const Tms& y, int k) {
  return localizing_matrix(y, Polynomial::constant(y.num_vars(), 1.0), k);
}

Eigen::MatrixXd localizing_matrix(const Tms& y, const Polynomial& q, int k) {
  if (q.num_vars() != y.num_vars()) throw std::invalid_argument("localizing_matrix: variable count mismatch");
  if (q.degree() > 2 * k) throw std::invalid_argument("localizing_matrix: deg(q) > 2k");
  if (2 * k > y.degree()) throw std::invalid_argument("localizing_matrix: 2k exceeds tms degree");
  const int dq = (q.degree() + 1) / 2;  // ceil(deg(q)/2)
  const MonomialBasis basis(y.num_vars(), k - dq);
  const int n = basis.size();
  Eigen::MatrixXd L(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const Monomial prod = basis.at(i) * basis.at(j);
      double s = 0.0;
      for (const auto& [m, c] : q.terms()) s += c * y.value(prod * m);
      L(i, j) = s;
      L(j, i) = s;
    }
  }
  return L;
}

Eigen::MatrixXd block_localizing_matrix(const Tms& y, const PolyMatrix& H, int k) {
  if (H.num_vars() != y.num_vars()) throw std::invalid_argument("block_localizing_matrix: variable count mismatch");
  if (!H.is_symmetric()) throw std::invalid_argument("block_localizing_matrix: H must be symmetric");
  const int maxdeg = H.max_degree();
  if (maxdeg > 2 * k) throw std::invalid_argument("block_localizing_matrix: deg(H) > 2k");
  const int dH = (maxdeg + 1) / 2;
  const MonomialBasis basis(y.num_vars(), k - dH);
  const int nb = basis.size();
  const int l = H.rows();
  Eigen::MatrixXd B(l * nb, l * nb);
  for (int bi = 0; bi < l; ++bi) {
    for (int bj = bi; bj < l; ++bj) {
      const Polynomial& q = H(bi, bj);
      Eigen::MatrixXd L(nb, nb);
      for (int i = 0; i < nb; ++i) {
        for (int j = 0; j < nb; ++j) {
          const Monomial prod = basis.at(i) * basis.at(j);
          double s = 0.0;
          for (const auto& [m, c] : q.terms()) s += c * y.value(prod * m);
          L(i, j) = s;
        }
      }
      B.block(bi * nb, bj * nb, nb, nb) = L;
      if (bi != bj) B.block(bj * nb, bi * nb, nb, nb) = L.transpose();
    }
  }
  return B;
}

int numerical_rank(const Eigen::MatrixXd& M, double tol_rel) {
  if (M.rows() != M.cols()) throw std::invalid_argument("numerical_rank: matrix must be square");
  if (M.rows() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()),
                                                    Eigen::EigenvaluesOnly);
  const Eigen::VectorXd sv = es.eigenvalues().cwiseAbs();
  const double cutoff = tol_rel * std::max(sv.maxCoeff(), 1.0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv[i] > cutoff) ++rank;
  }
  return rank;
}

}  // namespace rpop
