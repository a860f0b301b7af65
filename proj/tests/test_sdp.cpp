#include <doctest.h>

#include <cmath>
#include <random>

#include "rpop/sdp.hpp"

using rpop::AffineScalar;
using rpop::SdpBlock;
using rpop::SdpProblem;
using rpop::SdpSolution;
using rpop::SdpStatus;

namespace {

// minimize y s.t. [[1, y], [y, 1]] >= 0, optimum -1
SdpProblem boundary_problem() {
  SdpProblem p;
  p.num_scalars = 1;
  p.objective.terms = {{0, 1.0}};
  SdpBlock blk;
  blk.dim = 2;
  blk.constant = {{0, 0, 1.0}, {1, 1, 1.0}};
  blk.terms = {{{0, 1, 1.0}}};
  p.blocks.push_back(blk);
  return p;
}

// minimize 0 s.t. [u] >= 0, u = -1: infeasible
SdpProblem contradiction_problem() {
  SdpProblem p;
  p.num_scalars = 1;
  SdpBlock blk;
  blk.dim = 1;
  blk.terms = {{{0, 0, 1.0}}};
  p.blocks.push_back(blk);
  AffineScalar eq;
  eq.constant = 1.0;  // u + 1 = 0
  eq.terms = {{0, 1.0}};
  p.zero_constraints.push_back(eq);
  return p;
}

// minimize x s.t. [[x, 1], [1, x]] >= 0, optimum 1
SdpProblem determinant_problem() {
  SdpProblem p;
  p.num_scalars = 1;
  p.objective.terms = {{0, 1.0}};
  SdpBlock blk;
  blk.dim = 2;
  blk.constant = {{0, 1, 1.0}};
  blk.terms = {{{0, 0, 1.0}, {1, 1, 1.0}}};
  p.blocks.push_back(blk);
  return p;
}

}  // namespace

TEST_CASE("analytic boundary problem solves to -1") {
  const SdpSolution sol = rpop::solve_sdp(boundary_problem());
  REQUIRE(sol.status == SdpStatus::Optimal);
  CHECK(sol.primal[0] == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK(sol.primal_objective == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK(sol.dual_objective <= sol.primal_objective + 1e-7 * (1.0 + std::abs(sol.primal_objective)));
}

TEST_CASE("contradictory equality is certified infeasible") {
  const SdpSolution sol = rpop::solve_sdp(contradiction_problem());
  REQUIRE(sol.status == SdpStatus::PrimalInfeasible);
  REQUIRE(sol.certificate.has_value());
  const auto check = rpop::verify_infeasibility_certificate(contradiction_problem(),
                                                            *sol.certificate, 1e-7);
  CHECK(check.valid);
  CHECK(check.violation >= 1e-7);
  CHECK(check.residual <= 1e-7);
  CHECK(check.min_eigenvalue >= -1e-7);
}

TEST_CASE("determinant-bound problem solves to 1") {
  const SdpSolution sol = rpop::solve_sdp(determinant_problem());
  REQUIRE(sol.status == SdpStatus::Optimal);
  CHECK(sol.primal[0] == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("normalization pins the designated scalar") {
  // scalars (u0, u1), u0 pinned to 1, minimize u1 over [[u0, u1], [u1, u0]] >= 0
  SdpProblem p;
  p.num_scalars = 2;
  p.normalization = 0;
  p.objective.terms = {{1, 1.0}};
  SdpBlock blk;
  blk.dim = 2;
  blk.terms = {{{0, 0, 1.0}, {1, 1, 1.0}}, {{0, 1, 1.0}}};
  p.blocks.push_back(blk);
  const SdpSolution sol = rpop::solve_sdp(p);
  REQUIRE(sol.status == SdpStatus::Optimal);
  CHECK(sol.primal[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sol.primal[1] == doctest::Approx(-1.0).epsilon(1e-7));
}

TEST_CASE("unbounded problem reports an improving ray") {
  // minimize -u over [u] >= 0
  SdpProblem p;
  p.num_scalars = 1;
  p.objective.terms = {{0, -1.0}};
  SdpBlock blk;
  blk.dim = 1;
  blk.terms = {{{0, 0, 1.0}}};
  p.blocks.push_back(blk);
  const SdpSolution sol = rpop::solve_sdp(p);
  REQUIRE(sol.status == SdpStatus::DualInfeasible);
  REQUIRE(sol.improving_ray.has_value());
  CHECK((*sol.improving_ray)[0] > 0.0);
}

TEST_CASE("reported residuals match an independent recomputation") {
  for (const SdpProblem& p : {boundary_problem(), determinant_problem()}) {
    const SdpSolution sol = rpop::solve_sdp(p);
    REQUIRE(sol.status == SdpStatus::Optimal);
    const auto rec = rpop::recompute_residuals(p, sol.primal, sol.dual_objective);
    CHECK(std::abs(rec.primal - sol.residuals.primal) <= 1e-9);
    CHECK(std::abs(rec.gap - sol.residuals.gap) <= 1e-9);
  }
}

TEST_CASE("merit is non-increasing on the fixtures") {
  for (const SdpProblem& p : {boundary_problem(), contradiction_problem(), determinant_problem()}) {
    const SdpSolution sol = rpop::solve_sdp(p);
    REQUIRE(sol.merit_history.size() >= 2);
    for (size_t i = 1; i < sol.merit_history.size(); ++i) {
      CHECK(sol.merit_history[i] <= sol.merit_history[i - 1] * (1.0 + 1e-9) + 1e-12);
    }
  }
}

TEST_CASE("weak duality holds on random bounded problems") {
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int m = 3;
    SdpProblem p;
    p.num_scalars = m;
    for (int i = 0; i < m; ++i) p.objective.terms.emplace_back(i, u(rng));
    // a random block made strictly feasible at u0
    Eigen::VectorXd u0(m);
    for (int i = 0; i < m; ++i) u0[i] = u(rng);
    SdpBlock blk;
    blk.dim = 3;
    blk.terms.resize(m);
    Eigen::MatrixXd shift = Eigen::MatrixXd::Identity(3, 3);
    for (int i = 0; i < m; ++i) {
      for (int r = 0; r < 3; ++r) {
        for (int c = r; c < 3; ++c) {
          const double val = u(rng);
          blk.terms[i].push_back({r, c, val});
          shift(r, c) -= val * u0[i];
          if (r != c) shift(c, r) -= val * u0[i];
        }
      }
    }
    for (int r = 0; r < 3; ++r) {
      for (int c = r; c < 3; ++c) blk.constant.push_back({r, c, shift(r, c)});
    }
    p.blocks.push_back(blk);
    // box block keeps it bounded
    SdpBlock box;
    box.dim = 2 * m;
    box.terms.resize(m);
    for (int i = 0; i < m; ++i) {
      box.constant.push_back({2 * i, 2 * i, 10.0});
      box.constant.push_back({2 * i + 1, 2 * i + 1, 10.0});
      box.terms[i].push_back({2 * i, 2 * i, 1.0});
      box.terms[i].push_back({2 * i + 1, 2 * i + 1, -1.0});
    }
    p.blocks.push_back(box);

    const SdpSolution sol = rpop::solve_sdp(p);
    REQUIRE(sol.status == SdpStatus::Optimal);
    CHECK(sol.dual_objective <=
          sol.primal_objective + 1e-7 * (1.0 + std::abs(sol.primal_objective)));
    CHECK(sol.residuals.primal <= 1e-7);
  }
}

TEST_CASE("dimension cap is enforced") {
  SdpProblem p;
  p.num_scalars = 1;
  SdpBlock blk;
  blk.dim = 2001;
  blk.terms = {{{0, 0, 1.0}}};
  p.blocks.push_back(blk);
  CHECK_THROWS_AS(rpop::solve_sdp(p), std::invalid_argument);
}

TEST_CASE("problem description names the shape") {
  const std::string d = contradiction_problem().describe();
  CHECK(d.find("1 scalars") != std::string::npos);
  CHECK(d.find("1 psd blocks") != std::string::npos);
  CHECK(d.find("1 zero constraints") != std::string::npos);
}
