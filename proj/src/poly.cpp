#include "rpop/poly.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace rpop {

Monomial::Monomial(std::vector<int> exponents) : exponents_(std::move(exponents)) {
  for (int e : exponents_) {
    if (e < 0) throw std::invalid_argument("Monomial: negative exponent");
    degree_ += e;
  }
}

Monomial Monomial::unit(int num_vars) { return Monomial(std::vector<int>(num_vars, 0)); }

Monomial Monomial::variable(int num_vars, int index) {
  if (index < 0 || index >= num_vars) throw std::invalid_argument("Monomial: variable index out of range");
  std::vector<int> e(num_vars, 0);
  e[index] = 1;
  return Monomial(std::move(e));
}

Monomial Monomial::operator*(const Monomial& rhs) const {
  if (num_vars() != rhs.num_vars()) throw std::invalid_argument("Monomial: variable count mismatch");
  std::vector<int> e(exponents_);
  for (int i = 0; i < rhs.num_vars(); ++i) e[i] += rhs.exponents_[i];
  return Monomial(std::move(e));
}

double Monomial::evaluate(const Eigen::VectorXd& v) const {
  if (v.size() != num_vars()) throw std::invalid_argument("Monomial: point dimension mismatch");
  double r = 1.0;
  for (int i = 0; i < num_vars(); ++i) {
    for (int k = 0; k < exponents_[i]; ++k) r *= v[i];
  }
  return r;
}

bool Monomial::operator<(const Monomial& rhs) const {
  if (degree_ != rhs.degree_) return degree_ < rhs.degree_;
  // Within a degree, larger exponent on an earlier variable comes first
  // (x1^2 before x1x2 before x2^2).
  return exponents_ > rhs.exponents_;
}

std::string Monomial::to_string() const {
  if (degree_ == 0) return "1";
  std::ostringstream os;
  bool first = true;
  for (int i = 0; i < num_vars(); ++i) {
    if (exponents_[i] == 0) continue;
    if (!first) os << "*";
    os << "x" << (i + 1);
    if (exponents_[i] > 1) os << "^" << exponents_[i];
    first = false;
  }
  return os.str();
}

Polynomial Polynomial::constant(int num_vars, double value) {
  Polynomial p(num_vars);
  p.add_term(Monomial::unit(num_vars), value);
  return p;
}

Polynomial Polynomial::variable(int num_vars, int index) {
  Polynomial p(num_vars);
  p.add_term(Monomial::variable(num_vars, index), 1.0);
  return p;
}

int Polynomial::degree() const {
  // Terms are ordered by degree, so the last one is maximal.
  return terms_.empty() ? 0 : terms_.rbegin()->first.degree();
}

double Polynomial::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::add_term(const Monomial& m, double coeff) {
  if (m.num_vars() != num_vars_) throw std::invalid_argument("Polynomial: monomial variable count mismatch");
  auto [it, inserted] = terms_.try_emplace(m, coeff);
  if (!inserted) it->second += coeff;
  if (std::abs(it->second) < kCoeffPruneTol) terms_.erase(it);
}

Polynomial& Polynomial::operator+=(const Polynomial& rhs) {
  if (num_vars_ != rhs.num_vars_) throw std::invalid_argument("Polynomial: variable count mismatch");
  for (const auto& [m, c] : rhs.terms_) add_term(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& rhs) {
  if (num_vars_ != rhs.num_vars_) throw std::invalid_argument("Polynomial: variable count mismatch");
  for (const auto& [m, c] : rhs.terms_) add_term(m, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double scale) {
  if (scale == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= scale;
    if (std::abs(it->second) < kCoeffPruneTol) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
  return *this;
}

Polynomial Polynomial::operator+(const Polynomial& rhs) const {
  Polynomial r(*this);
  r += rhs;
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& rhs) const {
  Polynomial r(*this);
  r -= rhs;
  return r;
}

Polynomial Polynomial::operator-() const {
  Polynomial r(*this);
  r *= -1.0;
  return r;
}

Polynomial Polynomial::operator*(const Polynomial& rhs) const {
  if (num_vars_ != rhs.num_vars_) throw std::invalid_argument("Polynomial: variable count mismatch");
  Polynomial r(num_vars_);
  for (const auto& [m1, c1] : terms_) {
    for (const auto& [m2, c2] : rhs.terms_) {
      r.add_term(m1 * m2, c1 * c2);
    }
  }
  return r;
}

Polynomial Polynomial::operator*(double scale) const {
  Polynomial r(*this);
  r *= scale;
  return r;
}

double Polynomial::evaluate(const Eigen::VectorXd& v) const {
  if (v.size() != num_vars_) throw std::invalid_argument("Polynomial: point dimension mismatch");
  // Map iteration order is the basis order, which pins the summation order.
  double r = 0.0;
  for (const auto& [m, c] : terms_) r += c * m.evaluate(v);
  return r;
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    if (!first) os << (c >= 0 ? " + " : " - ");
    else if (c < 0) os << "-";
    os << std::abs(c);
    if (m.degree() > 0) os << "*" << m.to_string();
    first = false;
  }
  return os.str();
}

PolyMatrix::PolyMatrix(int rows, int cols, int num_vars)
    : rows_(rows), cols_(cols), num_vars_(num_vars), entries_(rows * cols, Polynomial(num_vars)) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("PolyMatrix: negative dimension");
}

const Polynomial& PolyMatrix::operator()(int i, int j) const {
  if (i < 0 || i >= rows_ || j < 0 || j >= cols_) throw std::out_of_range("PolyMatrix: index");
  return entries_[static_cast<size_t>(i) * cols_ + j];
}

Polynomial& PolyMatrix::operator()(int i, int j) {
  if (i < 0 || i >= rows_ || j < 0 || j >= cols_) throw std::out_of_range("PolyMatrix: index");
  return entries_[static_cast<size_t>(i) * cols_ + j];
}

bool PolyMatrix::is_symmetric() const {
  if (rows_ != cols_) return false;
  for (int i = 0; i < rows_; ++i) {
    for (int j = i + 1; j < cols_; ++j) {
      if ((*this)(i, j).terms() != (*this)(j, i).terms()) return false;
    }
  }
  return true;
}

int PolyMatrix::max_degree() const {
  int d = 0;
  for (const auto& p : entries_) d = std::max(d, p.degree());
  return d;
}

Eigen::MatrixXd PolyMatrix::evaluate(const Eigen::VectorXd& v) const {
  Eigen::MatrixXd M(rows_, cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) M(i, j) = (*this)(i, j).evaluate(v);
  }
  return M;
}

}  // namespace rpop
