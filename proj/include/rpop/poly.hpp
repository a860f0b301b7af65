#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace rpop {

// Coefficients with absolute value below this are dropped after arithmetic,
// so spurious near-zero terms cannot inflate constraint degrees downstream.
inline constexpr double kCoeffPruneTol = 1e-14;

/// Exponent vector alpha of a power product x^alpha, with |alpha| cached.
class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(std::vector<int> exponents);

  static Monomial unit(int num_vars);                 // x^0
  static Monomial variable(int num_vars, int index);  // x_index

  int num_vars() const { return static_cast<int>(exponents_.size()); }
  int degree() const { return degree_; }
  const std::vector<int>& exponents() const { return exponents_; }
  int exponent(int i) const { return exponents_[i]; }

  Monomial operator*(const Monomial& rhs) const;
  double evaluate(const Eigen::VectorXd& v) const;

  bool operator==(const Monomial& rhs) const { return exponents_ == rhs.exponents_; }
  bool operator!=(const Monomial& rhs) const { return !(*this == rhs); }

  // Basis order used throughout: degree first, then lexicographic with x1
  // heaviest, so [1, x1, ..., xl, x1^2, x1x2, ...] is increasing.
  bool operator<(const Monomial& rhs) const;

  std::string to_string() const;

 private:
  std::vector<int> exponents_;
  int degree_ = 0;
};

/// Sparse real multivariate polynomial keyed by exponent vectors.
/// Zero coefficients are never stored.
class Polynomial {
 public:
  explicit Polynomial(int num_vars = 0) : num_vars_(num_vars) {}

  static Polynomial constant(int num_vars, double value);
  static Polynomial variable(int num_vars, int index);

  int num_vars() const { return num_vars_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;  // degree of the zero polynomial is 0
  const std::map<Monomial, double>& terms() const { return terms_; }
  double coefficient(const Monomial& m) const;

  void add_term(const Monomial& m, double coeff);

  Polynomial& operator+=(const Polynomial& rhs);
  Polynomial& operator-=(const Polynomial& rhs);
  Polynomial& operator*=(double scale);
  Polynomial operator+(const Polynomial& rhs) const;
  Polynomial operator-(const Polynomial& rhs) const;
  Polynomial operator-() const;
  Polynomial operator*(const Polynomial& rhs) const;
  Polynomial operator*(double scale) const;

  double evaluate(const Eigen::VectorXd& v) const;

  std::string to_string() const;

 private:
  int num_vars_ = 0;
  std::map<Monomial, double> terms_;
};

inline Polynomial operator*(double scale, const Polynomial& p) { return p * scale; }

/// Dense grid of polynomials sharing one variable set (the paper's H).
class PolyMatrix {
 public:
  PolyMatrix(int rows, int cols, int num_vars);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int num_vars() const { return num_vars_; }

  const Polynomial& operator()(int i, int j) const;
  Polynomial& operator()(int i, int j);

  // Entry-for-entry symmetry (same term maps), as required of constraints.
  bool is_symmetric() const;
  int max_degree() const;

  Eigen::MatrixXd evaluate(const Eigen::VectorXd& v) const;

 private:
  int rows_ = 0, cols_ = 0, num_vars_ = 0;
  std::vector<Polynomial> entries_;
};

}  // namespace rpop
