#include <doctest.h>

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "rpop/care.hpp"
#include "rpop/fixtures.hpp"

using rpop::CareProblem;
using rpop::Formulation;
using rpop::LqrProblem;
using rpop::ObjectiveSpec;
using rpop::PopProblem;

namespace {

const CareProblem& ex(int n) { return rpop::paper_example(n).care; }

// A = diag(-1,-2), R = diag(1,2), Q = diag(2,3): solutions from scalar quadratics
CareProblem diagonal_illustration() {
  Eigen::MatrixXd A = Eigen::Vector2d(-1, -2).asDiagonal();
  Eigen::MatrixXd R = Eigen::Vector2d(1, 2).asDiagonal();
  Eigen::MatrixXd Q = Eigen::Vector2d(2, 3).asDiagonal();
  return rpop::make_care(A, R, Q);
}

}  // namespace

TEST_CASE("lqr front-end builds R and Q") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3, 3);
  Eigen::MatrixXd B(3, 1), C(1, 3), W(1, 1);
  B << 1, 1, 0;
  C << 1, 1, 2;
  W << 1;
  const CareProblem care = rpop::build_care_from_lqr({A, B, C, W});
  Eigen::MatrixXd Rexp(3, 3), Qexp(3, 3);
  Rexp << 1, 1, 0, 1, 1, 0, 0, 0, 0;
  Qexp << 1, 1, 2, 1, 1, 2, 2, 2, 4;
  CHECK((care.R - Rexp).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((care.Q - Qexp).cwiseAbs().maxCoeff() <= 1e-14);

  const CareProblem id = rpop::build_care_from_lqr(
      {A, Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Zero(1, 3),
       Eigen::MatrixXd::Identity(3, 3)});
  CHECK((id.R - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(id.Q.cwiseAbs().maxCoeff() == 0.0);

  const CareProblem half = rpop::build_care_from_lqr(
      {A, Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Zero(1, 3),
       2.0 * Eigen::MatrixXd::Identity(3, 3)});
  CHECK((half.R - 0.5 * Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-14);

  Eigen::MatrixXd Wbad = Eigen::MatrixXd::Zero(1, 1);
  CHECK_THROWS_AS(rpop::build_care_from_lqr({A, B, C, Wbad}), std::invalid_argument);
}

TEST_CASE("feedback gain") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 2);
  const LqrProblem lqr{A, Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2),
                       Eigen::MatrixXd::Identity(2, 2)};
  Eigen::MatrixXd P(2, 2);
  P << 2, 1, 1, 3;
  CHECK((rpop::feedback_gain(lqr, P) - P).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(rpop::feedback_gain(lqr, Eigen::MatrixXd::Zero(2, 2)).cwiseAbs().maxCoeff() == 0.0);

  // scalar a=-1, b=1, w=1, c=sqrt(2): p = -1 + sqrt(3), L* = p
  Eigen::MatrixXd a(1, 1), b(1, 1), c(1, 1), w(1, 1);
  a << -1;
  b << 1;
  c << std::sqrt(2.0);
  w << 1;
  const LqrProblem scalar{a, b, c, w};
  const double p = -1.0 + std::sqrt(3.0);
  Eigen::MatrixXd Ps(1, 1);
  Ps << p;
  CHECK(rpop::feedback_gain(scalar, Ps)(0, 0) == doctest::Approx(0.7321).epsilon(1e-4));
  CHECK(rpop::care_residual(rpop::build_care_from_lqr(scalar), Ps) <= 1e-12);
}

TEST_CASE("cholesky formulation shape and consistency") {
  ObjectiveSpec obj;
  {
    Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);
    const PopProblem pop = rpop::formulate_cholesky(rpop::make_care(-I2, I2, I2), obj);
    CHECK(pop.num_vars == 3);
    CHECK(pop.equalities.size() == 3);
    CHECK(pop.inequalities.size() == 2);
    for (const auto& g : pop.equalities) CHECK(g.degree() == 4);
  }
  {
    const PopProblem pop = rpop::formulate_cholesky(ex(2), obj);
    CHECK(pop.num_vars == 6);
    CHECK(pop.equalities.size() == 6);
    CHECK(pop.inequalities.size() == 3);
    CHECK(pop.max_constraint_degree() == 4);  // d0 = 2
  }
  {
    // the Cholesky factor of the printed example-4 solution nearly zeroes
    // the equality system
    const auto& fx = rpop::paper_example(4);
    const PopProblem pop = rpop::formulate_cholesky(fx.care, obj);
    Eigen::LLT<Eigen::MatrixXd> llt(fx.reference_solutions[0]);
    REQUIRE(llt.info() == Eigen::Success);
    const Eigen::MatrixXd X = llt.matrixL();
    Eigen::VectorXd v(6);
    int idx = 0;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j <= i; ++j) v[idx++] = X(i, j);
    }
    for (const auto& g : pop.equalities) CHECK(std::abs(g.evaluate(v)) <= 5e-3);
  }
}

TEST_CASE("psd formulation shape and consistency") {
  ObjectiveSpec obj;
  const PopProblem pop = rpop::formulate_psd(ex(2), obj);
  CHECK(pop.num_vars == 6);
  CHECK(pop.equalities.size() == 6);
  REQUIRE(pop.matrix_ineq.has_value());
  CHECK(pop.matrix_ineq->rows() == 3);
  CHECK(pop.matrix_ineq->max_degree() == 1);  // dbar_0 = 1
  for (const auto& g : pop.equalities) CHECK(g.degree() == 2);

  // P = 0 leaves exactly the entries of Q
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(6);
  int idx = 0;
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      CHECK(pop.equalities[idx].evaluate(zero) == doctest::Approx(ex(2).Q(i, j)));
      ++idx;
    }
  }

  // the printed P_{*,2} nearly zeroes the system
  const Eigen::MatrixXd& P2 = rpop::paper_example(2).reference_solutions[1];
  Eigen::VectorXd v(6);
  idx = 0;
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) v[idx++] = P2(i, j);
  }
  for (const auto& g : pop.equalities) CHECK(std::abs(g.evaluate(v)) <= 5e-3);
}

TEST_CASE("ball constraint constants") {
  ObjectiveSpec obj;
  {
    const auto& fx = rpop::paper_example(4);
    PopProblem pop = rpop::formulate_cholesky(fx.care, obj);
    pop = rpop::add_ball_constraint(std::move(pop), *fx.bound, Formulation::Cholesky);
    REQUIRE(pop.inequalities.size() == 4);
    const auto& ball = pop.inequalities.back();
    CHECK(ball.degree() == 4);
    const double constant = ball.coefficient(rpop::Monomial::unit(6));
    CHECK(std::abs(constant - 1.3422) <= 5e-4);
    CHECK(constant == doctest::Approx(fx.bound->P_u.squaredNorm()).epsilon(1e-12));
  }
  {
    const auto& fx = rpop::paper_example(5);
    PopProblem pop = rpop::formulate_psd(fx.care, obj);
    pop = rpop::add_ball_constraint(std::move(pop), *fx.bound, Formulation::Psd);
    REQUIRE(pop.inequalities.size() == 1);
    const auto& ball = pop.inequalities.back();
    CHECK(ball.degree() == 2);
    CHECK(ball.coefficient(rpop::Monomial::unit(6)) ==
          doctest::Approx(fx.bound->P_u.squaredNorm()).epsilon(1e-12));
  }
  {
    // a zero bound forces the zero matrix
    ObjectiveSpec o2;
    PopProblem pop = rpop::formulate_psd(ex(2), o2);
    pop = rpop::add_ball_constraint(std::move(pop), {Eigen::MatrixXd::Zero(3, 3), ""},
                                    Formulation::Psd);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(6);
    CHECK(pop.inequalities.back().evaluate(v) == 0.0);
    v[0] = 0.5;
    CHECK(pop.inequalities.back().evaluate(v) < 0.0);
    // dimension mismatch is rejected
    CHECK_THROWS_AS(
        rpop::add_ball_constraint(std::move(pop), {Eigen::MatrixXd::Zero(2, 2), ""},
                                  Formulation::Psd),
        std::invalid_argument);
  }
}

TEST_CASE("care residual") {
  CHECK(rpop::care_residual(ex(2), Eigen::MatrixXd::Zero(3, 3)) ==
        doctest::Approx(ex(2).Q.norm()).epsilon(1e-12));

  const CareProblem diag = diagonal_illustration();
  Eigen::MatrixXd P = Eigen::Vector2d(0.7321, 0.5811).asDiagonal();
  CHECK(rpop::care_residual(diag, P) <= 5e-4);

  CHECK(rpop::care_residual(ex(2), rpop::paper_example(2).reference_solutions[0]) <= 5e-3);
  CHECK_THROWS_AS(rpop::care_residual(ex(2), Eigen::MatrixXd::Zero(2, 2)),
                  std::invalid_argument);
}

TEST_CASE("stability check") {
  Eigen::MatrixXd I3 = Eigen::MatrixXd::Identity(3, 3);
  const CareProblem stable = rpop::make_care(-I3, Eigen::MatrixXd::Zero(3, 3), I3);
  CHECK(rpop::stability_check(stable, 100.0 * I3));
  const CareProblem unstable = rpop::make_care(I3, Eigen::MatrixXd::Zero(3, 3), I3);
  CHECK_FALSE(rpop::stability_check(unstable, I3));

  const auto& fx = rpop::paper_example(4);
  CHECK(rpop::stability_check(fx.care, fx.reference_solutions[0]));
}

TEST_CASE("objective coefficients are seed deterministic and in range") {
  ObjectiveSpec a, b;
  a.seed = b.seed = 987654321;
  rpop::formulate_cholesky(ex(2), a);
  rpop::formulate_cholesky(ex(2), b);
  REQUIRE(a.square_coeffs.size() == 6);
  REQUIRE(a.linear_coeffs.size() == 6);
  CHECK(a.square_coeffs == b.square_coeffs);
  CHECK(a.cross_coeffs == b.cross_coeffs);
  CHECK(a.linear_coeffs == b.linear_coeffs);
  for (double c : a.square_coeffs) CHECK((c >= 1.0 && c <= 2.0));
  for (double c : a.cross_coeffs) CHECK((c >= 1.0 && c <= 2.0));
  for (double c : a.linear_coeffs) CHECK((c >= 1.0 && c <= 2.0));

  ObjectiveSpec c;
  c.seed = 123;
  rpop::formulate_cholesky(ex(2), c);
  CHECK(a.square_coeffs != c.square_coeffs);
}

TEST_CASE("asymmetric inputs are rejected") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 2);
  Eigen::MatrixXd R(2, 2);
  R << 1, 0.5, 0.4, 1;
  CHECK_THROWS_AS(rpop::make_care(A, R, Eigen::MatrixXd::Zero(2, 2)), std::invalid_argument);
}

TEST_CASE("solve_care on example 2 via the psd formulation") {
  const auto& fx = rpop::paper_example(2);
  rpop::HierarchyParams params;
  const rpop::CareOutcome oc =
      rpop::solve_care(fx.care, Formulation::Psd, ObjectiveSpec{}, std::nullopt, params);
  REQUIRE(oc.verdict == rpop::CareVerdict::Solved);
  CHECK(oc.residual_norm <= 1e-6);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(oc.P, Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().minCoeff() >= -1e-8);
  // the report keeps the drawn coefficients
  CHECK(oc.objective.square_coeffs.size() == 6);
}

TEST_CASE("cholesky reconstruction is consistent") {
  const auto& fx = rpop::paper_example(4);
  rpop::HierarchyParams params;
  const rpop::CareOutcome oc =
      rpop::solve_care(fx.care, Formulation::Cholesky, ObjectiveSpec{}, fx.bound, params);
  REQUIRE(oc.verdict == rpop::CareVerdict::Solved);
  const int n = 3;
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, n);
  int idx = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) X(i, j) = oc.solution_point[idx++];
  }
  CHECK((X * X.transpose() - oc.P).norm() <= 1e-10);
  for (int i = 0; i < n; ++i) CHECK(X(i, i) >= -1e-8);
}
