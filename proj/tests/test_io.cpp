#include <doctest.h>

#include <sstream>

#include "rpop/fixtures.hpp"
#include "rpop/io.hpp"

using nlohmann::json;
using rpop::ParseError;
using rpop::ProblemFile;

namespace {

std::string example4_psd_file() {
  const auto& fx = rpop::paper_example(4);
  ProblemFile pf;
  pf.kind = "care";
  pf.A = fx.care.A;
  pf.R = fx.care.R;
  pf.Q = fx.care.Q;
  pf.upper_bound = fx.bound->P_u;
  pf.config.formulation = "psd";
  return rpop::problem_to_json(pf).dump();
}

}  // namespace

TEST_CASE("problem files parse and round-trip") {
  const std::string text = example4_psd_file();
  const ProblemFile pf = rpop::parse_problem_file(text);
  CHECK(pf.kind == "care");
  CHECK(pf.schema_version == "1");
  CHECK(pf.A.rows() == 3);
  REQUIRE(pf.upper_bound.has_value());
  CHECK(pf.config.formulation == "psd");
  const ProblemFile again = rpop::parse_problem_file(rpop::problem_to_json(pf).dump());
  CHECK((again.A - pf.A).cwiseAbs().maxCoeff() == 0.0);
  CHECK((again.Q - pf.Q).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("parse errors name the offending field") {
  CHECK_THROWS_WITH_AS(rpop::parse_problem_file("{not json"),
                       doctest::Contains("invalid json"), ParseError);

  json j = json::parse(example4_psd_file());
  j.erase("kind");
  CHECK_THROWS_WITH_AS(rpop::parse_problem_file(j.dump()), doctest::Contains("kind"), ParseError);

  json bad = json::parse(example4_psd_file());
  bad["A"]["data"] = {1.0, 2.0};
  CHECK_THROWS_WITH_AS(rpop::parse_problem_file(bad.dump()),
                       doctest::Contains("field 'A'"), ParseError);

  // lqr without W
  json lqr;
  lqr["schema_version"] = "1";
  lqr["kind"] = "lqr";
  lqr["A"] = rpop::matrix_to_json(Eigen::MatrixXd::Identity(2, 2));
  lqr["B"] = rpop::matrix_to_json(Eigen::MatrixXd::Identity(2, 2));
  lqr["C"] = rpop::matrix_to_json(Eigen::MatrixXd::Identity(2, 2));
  CHECK_THROWS_WITH_AS(rpop::parse_problem_file(lqr.dump()), doctest::Contains("'W'"), ParseError);
}

TEST_CASE("exit codes are a total function of the verdicts") {
  using V = rpop::CareVerdict;
  CHECK(rpop::exit_code_for({V::Solved}) == 0);
  CHECK(rpop::exit_code_for({V::Solved, V::Solved}) == 0);
  CHECK(rpop::exit_code_for({V::Infeasible, V::Infeasible}) == 10);
  CHECK(rpop::exit_code_for({V::Indeterminate}) == 20);
  CHECK(rpop::exit_code_for({V::Solved, V::Indeterminate}) == 0);
  CHECK(rpop::exit_code_for({V::Infeasible, V::Indeterminate}) == 10);
  CHECK(rpop::exit_code_for({V::Solved, V::Infeasible}) == 20);  // contradiction
}

TEST_CASE("solve report echoes a re-runnable problem") {
  const ProblemFile pf = rpop::parse_problem_file(example4_psd_file());
  const json report = rpop::run_solve_report(pf);
  CHECK(report["command"] == "solve");
  CHECK(report["exit_code"].get<int>() == 0);
  REQUIRE(report["results"].size() == 1);
  CHECK(report["results"][0]["verdict"] == "solved");
  CHECK(report["results"][0]["formulation"] == "psd");
  CHECK(report["results"][0]["residual"].get<double>() <= 1e-6);
  CHECK(report["results"][0]["stabilizing"].get<bool>());
  // no wall-clock fields unless timings are requested
  CHECK_FALSE(report["results"][0].contains("wall_seconds"));

  // re-ingesting the echo reproduces the verdict
  const ProblemFile echo = rpop::parse_problem_file(report["problem"].dump());
  const json again = rpop::run_solve_report(echo);
  CHECK(again["results"][0]["verdict"] == report["results"][0]["verdict"]);
  CHECK(again["exit_code"] == report["exit_code"]);
}

TEST_CASE("lqr report appends the feedback gain") {
  const auto& fx = rpop::paper_example(4);
  ProblemFile pf;
  pf.kind = "lqr";
  pf.A = fx.lqr->A;
  pf.B = fx.lqr->B;
  pf.C = fx.lqr->C;
  pf.W = fx.lqr->W;
  pf.upper_bound = fx.bound->P_u;
  pf.config.formulation = "psd";
  const json report = rpop::run_lqr_report(pf);
  CHECK(report["command"] == "lqr");
  REQUIRE(report["results"][0]["verdict"] == "solved");
  CHECK(report["results"][0].contains("gain"));
  // W = I means the gain equals B'P
  const json& gj = report["results"][0]["gain"];
  CHECK(gj["rows"].get<int>() == 3);

  ProblemFile care_pf;
  care_pf.kind = "care";
  care_pf.A = fx.care.A;
  care_pf.R = fx.care.R;
  care_pf.Q = fx.care.Q;
  CHECK_THROWS_AS(rpop::run_lqr_report(care_pf), ParseError);
}

TEST_CASE("baseline report carries traces and agreement") {
  const auto& fx = rpop::paper_example(4);
  ProblemFile pf;
  pf.kind = "care";
  pf.A = fx.care.A;
  pf.R = fx.care.R;
  pf.Q = fx.care.Q;
  const json report = rpop::run_baseline_report(pf);
  REQUIRE(report["traces"].size() == 4);
  for (const auto& tr : report["traces"]) CHECK(tr["converged"].get<bool>());
  CHECK(report["agreement"].size() == 6);  // all converged pairs
  for (const auto& [key, val] : report["agreement"].items()) {
    CHECK(val.get<double>() <= 1e-5);
  }

  // a tiny iteration cap trips the cap reason on newton
  pf.config.max_iter = 2;
  const json capped = rpop::run_baseline_report(pf);
  CHECK(capped["traces"][0]["method"] == "newton");
  CHECK_FALSE(capped["traces"][0]["converged"].get<bool>());
  CHECK(capped["traces"][0]["reason"] == "iteration cap");
}

TEST_CASE("bench selects single examples and is byte deterministic") {
  rpop::SolverConfig cfg;
  cfg.formulation = "psd";
  const json once = rpop::run_bench_report(cfg, "example4");
  REQUIRE(once["examples"].size() == 1);
  CHECK(once["examples"][0]["name"] == "example4");
  CHECK(once["summary"].size() == 1);
  CHECK(once["summary"][0]["psd"] == "solved");
  const json twice = rpop::run_bench_report(cfg, "example4");
  CHECK(once.dump() == twice.dump());
  CHECK_THROWS_AS(rpop::run_bench_report(cfg, "example9"), ParseError);
}

TEST_CASE("text rendering mentions the verdict") {
  const ProblemFile pf = rpop::parse_problem_file(example4_psd_file());
  const json report = rpop::run_solve_report(pf);
  const std::string text = rpop::render_report_text(report);
  CHECK(text.find("solved") != std::string::npos);
  CHECK(text.find("P =") != std::string::npos);
}
