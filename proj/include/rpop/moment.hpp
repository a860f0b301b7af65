#pragma once

#include <map>
#include <vector>

#include <Eigen/Core>

#include "rpop/poly.hpp"

namespace rpop {

/// All monomials of degree <= degree_bound in graded-lex order, with a
/// reverse index for exponent lookup.
class MonomialBasis {
 public:
  MonomialBasis(int num_vars, int degree_bound);

  int num_vars() const { return num_vars_; }
  int degree_bound() const { return degree_bound_; }
  int size() const { return static_cast<int>(list_.size()); }
  const std::vector<Monomial>& list() const { return list_; }
  const Monomial& at(int i) const { return list_[i]; }

  // Position of m in the enumeration; throws if deg(m) > degree_bound.
  int index_of(const Monomial& m) const;

 private:
  int num_vars_;
  int degree_bound_;
  std::vector<Monomial> list_;
  std::map<Monomial, int> index_;
};

MonomialBasis enumerate_basis(int num_vars, int degree_bound);

/// Truncated multi-sequence y of degree 2k: one value per monomial of
/// N^l_{2k}, stored densely in basis order.
class Tms {
 public:
  Tms(int num_vars, int degree);

  int num_vars() const { return basis_.num_vars(); }
  int degree() const { return basis_.degree_bound(); }
  const MonomialBasis& basis() const { return basis_; }

  double value(const Monomial& m) const { return values_[basis_.index_of(m)]; }
  double& value(const Monomial& m) { return values_[basis_.index_of(m)]; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }

 private:
  MonomialBasis basis_;
  Eigen::VectorXd values_;
};

// Moments of the Dirac measure at v: y_alpha = v^alpha.
Tms point_tms(const Eigen::VectorXd& v, int degree);

// Riesz functional <f, y> = sum_alpha f_alpha y_alpha.
double riesz(const Tms& y, const Polynomial& f);

// M_k(y): entry (alpha, beta) = y_{alpha+beta} over the degree-k basis.
Eigen::MatrixXd moment_matrix(const Tms& y, int k);

// L_q^{(k)}(y): entry (alpha, beta) = L_y(q * x^alpha * x^beta) over the
// degree k - ceil(deg(q)/2) basis.
Eigen::MatrixXd localizing_matrix(const Tms& y, const Polynomial& q, int k);

// Block matrix (L_{H_ij}^{(k)}(y))_{ij} for a symmetric polynomial matrix H;
// all blocks share the degree k - ceil(maxdeg(H)/2) basis.
Eigen::MatrixXd block_localizing_matrix(const Tms& y, const PolyMatrix& H, int k);

// Count of singular values above tol_rel * max(sigma_max, 1).
int numerical_rank(const Eigen::MatrixXd& M, double tol_rel);

}  // namespace rpop
