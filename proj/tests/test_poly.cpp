#include <doctest.h>

#include <cmath>
#include <random>

#include "rpop/poly.hpp"

using rpop::Monomial;
using rpop::Polynomial;

namespace {

// independent of Polynomial::evaluate: powers via std::pow, unordered sum
double eval_oracle(const Polynomial& p, const Eigen::VectorXd& v) {
  double r = 0.0;
  for (const auto& [m, c] : p.terms()) {
    double t = c;
    for (int i = 0; i < m.num_vars(); ++i) t *= std::pow(v[i], m.exponent(i));
    r += t;
  }
  return r;
}

Polynomial random_poly(std::mt19937& rng, int num_vars, int degree, int terms) {
  std::uniform_int_distribution<int> expo(0, degree);
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  Polynomial p(num_vars);
  for (int t = 0; t < terms; ++t) {
    std::vector<int> e(num_vars, 0);
    int budget = degree;
    for (int i = 0; i < num_vars && budget > 0; ++i) {
      e[i] = expo(rng) % (budget + 1);
      budget -= e[i];
    }
    p.add_term(Monomial(e), coeff(rng));
  }
  return p;
}

Eigen::VectorXd random_point(std::mt19937& rng, int dim) {
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = u(rng);
  return v;
}

}  // namespace

TEST_CASE("monomial ordering is graded lexicographic") {
  const Monomial one = Monomial::unit(2);
  const Monomial x1 = Monomial::variable(2, 0);
  const Monomial x2 = Monomial::variable(2, 1);
  CHECK(one < x1);
  CHECK(x1 < x2);
  CHECK(x2 < x1 * x1);
  CHECK(x1 * x1 < x1 * x2);
  CHECK(x1 * x2 < x2 * x2);
  CHECK(Monomial({2, 0}).degree() == 2);
  CHECK(Monomial({1, 1}) == x1 * x2);
}

TEST_CASE("binomial expansion") {
  const Polynomial x1 = Polynomial::variable(2, 0);
  const Polynomial x2 = Polynomial::variable(2, 1);
  const Polynomial sq = (x1 + x2) * (x1 + x2);
  CHECK(sq.terms().size() == 3);
  CHECK(sq.coefficient(Monomial({2, 0})) == doctest::Approx(1.0));
  CHECK(sq.coefficient(Monomial({1, 1})) == doctest::Approx(2.0));
  CHECK(sq.coefficient(Monomial({0, 2})) == doctest::Approx(1.0));
  CHECK(sq.degree() == 2);
}

TEST_CASE("multiplying by zero annihilates") {
  std::mt19937 rng(7);
  const Polynomial p = random_poly(rng, 3, 3, 6);
  const Polynomial zero(3);
  CHECK((p * zero).is_zero());
  CHECK((p * zero).degree() == 0);
}

TEST_CASE("difference of squares") {
  const Polynomial one = Polynomial::constant(1, 1.0);
  const Polynomial x = Polynomial::variable(1, 0);
  const Polynomial prod = (one + x) * (one - x);
  CHECK(prod.coefficient(Monomial::unit(1)) == doctest::Approx(1.0));
  CHECK(prod.coefficient(Monomial({2})) == doctest::Approx(-1.0));
  CHECK(prod.coefficient(Monomial({1})) == 0.0);
  CHECK(prod.terms().size() == 2);
}

TEST_CASE("evaluation basics") {
  Polynomial p(1);
  p.add_term(Monomial({2}), 3.0);
  Eigen::VectorXd v(1);
  v << 2.0;
  CHECK(p.evaluate(v) == doctest::Approx(12.0));

  Polynomial q(2);
  q.add_term(Monomial({1, 1}), 1.0);
  q.add_term(Monomial::unit(2), -1.0);
  Eigen::VectorXd w(2);
  w << 1.0, 1.0;
  CHECK(q.evaluate(w) == doctest::Approx(0.0));
}

TEST_CASE("evaluation is multiplicative against the oracle") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int l = 1 + static_cast<int>(rng() % 6);
    const Polynomial p = random_poly(rng, l, 3, 5);
    const Polynomial q = random_poly(rng, l, 3, 5);
    const Eigen::VectorXd v = random_point(rng, l);
    const double lhs = (p * q).evaluate(v);
    const double rhs = eval_oracle(p, v) * eval_oracle(q, v);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(lhs) + std::abs(rhs)));
  }
}

TEST_CASE("multiplication is commutative and associative term-for-term") {
  std::mt19937 rng(13);
  for (int trial = 0; trial < 25; ++trial) {
    const int l = 1 + static_cast<int>(rng() % 6);
    const Polynomial a = random_poly(rng, l, 4, 5);
    const Polynomial b = random_poly(rng, l, 4, 5);
    const Polynomial c = random_poly(rng, l, 2, 3);
    const Polynomial ab = a * b, ba = b * a;
    REQUIRE(ab.terms().size() == ba.terms().size());
    for (const auto& [m, coeff] : ab.terms()) {
      CHECK(ba.coefficient(m) == doctest::Approx(coeff).epsilon(1e-12));
    }
    const Polynomial abc1 = (a * b) * c, abc2 = a * (b * c);
    for (const auto& [m, coeff] : abc1.terms()) {
      CHECK(abc2.coefficient(m) == doctest::Approx(coeff).epsilon(1e-9));
    }
  }
}

TEST_CASE("evaluation is a ring homomorphism") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const int l = 1 + static_cast<int>(rng() % 6);
    const Polynomial p = random_poly(rng, l, 3, 6);
    const Polynomial q = random_poly(rng, l, 3, 6);
    const Eigen::VectorXd v = random_point(rng, l);
    const double sum_err =
        std::abs((p + q).evaluate(v) - p.evaluate(v) - q.evaluate(v));
    CHECK(sum_err <= 1e-12 * (1.0 + std::abs(p.evaluate(v)) + std::abs(q.evaluate(v))));
  }
}

TEST_CASE("no zero coefficients survive arithmetic") {
  std::mt19937 rng(19);
  for (int trial = 0; trial < 40; ++trial) {
    const int l = 1 + static_cast<int>(rng() % 4);
    const Polynomial p = random_poly(rng, l, 3, 6);
    const Polynomial q = random_poly(rng, l, 3, 6);
    for (const Polynomial& r : {p + q, p - q, p * q, p - p, p * 0.0}) {
      for (const auto& [m, c] : r.terms()) {
        CHECK(std::abs(c) >= rpop::kCoeffPruneTol);
      }
    }
  }
}

TEST_CASE("variable count mismatch is rejected") {
  const Polynomial p = Polynomial::variable(2, 0);
  const Polynomial q = Polynomial::variable(3, 0);
  CHECK_THROWS_AS(p * q, std::invalid_argument);
  Eigen::VectorXd v(1);
  v << 1.0;
  CHECK_THROWS_AS(p.evaluate(v), std::invalid_argument);
}

TEST_CASE("poly matrix symmetry check is term-exact") {
  rpop::PolyMatrix H(2, 2, 2);
  H(0, 0) = Polynomial::variable(2, 0);
  H(0, 1) = Polynomial::variable(2, 1);
  H(1, 0) = Polynomial::variable(2, 1);
  H(1, 1) = Polynomial::constant(2, 1.0);
  CHECK(H.is_symmetric());
  H(1, 0) = Polynomial::variable(2, 1) * 2.0;
  CHECK_FALSE(H.is_symmetric());
  CHECK(H.max_degree() == 1);
}
