#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "rpop/baselines.hpp"
#include "rpop/care.hpp"

namespace rpop {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Solver knobs carried by a problem file or set from the command line.
struct SolverConfig {
  uint64_t seed = 20240501;
  int k_max = 0;  // 0 = per-formulation default (4 Cholesky, 3 PSD)
  std::string formulation = "both";  // cholesky | psd | both
  double tol_feas = 1e-8;
  double tol_gap = 1e-8;
  double tol_cert = 1e-7;
  double tol_rank = 1e-6;
  double tol_extraction = 1e-6;
  int max_iter = 100000;  // baseline iteration cap
  bool timings = false;   // include wall-clock fields in JSON output
};

struct ProblemFile {
  std::string schema_version = "1";
  std::string kind;  // "care" | "lqr"
  Eigen::MatrixXd A, R, Q;  // kind care
  Eigen::MatrixXd B, C, W;  // kind lqr
  std::optional<Eigen::MatrixXd> upper_bound;
  SolverConfig config;
};

// Parsing raises ParseError naming the offending field.
ProblemFile parse_problem_file(const std::string& json_text);
ProblemFile load_problem_file(const std::string& path);
Eigen::MatrixXd parse_matrix_file(const std::string& path);  // {"rows","cols","data"}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M);
nlohmann::json problem_to_json(const ProblemFile& pf);

CareProblem care_from_file(const ProblemFile& pf);
HierarchyParams params_from_config(const SolverConfig& config, Formulation formulation);

// verdict -> process exit code: 0 solved, 10 infeasible, 20 indeterminate
int exit_code_for(const std::vector<CareVerdict>& verdicts);

/// Reports are JSON documents with the input echoed under "problem" so a
/// run can be reproduced from its own output.
nlohmann::json run_solve_report(const ProblemFile& pf);
nlohmann::json run_lqr_report(const ProblemFile& pf);
nlohmann::json run_baseline_report(const ProblemFile& pf);
nlohmann::json run_bench_report(const SolverConfig& config, const std::string& only = "");

std::string render_report_text(const nlohmann::json& report);

}  // namespace rpop
