#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rpop/io.hpp"

namespace {

struct CommonFlags {
  std::string json_path;
  std::string formulation;
  std::string bound_path;
  std::optional<uint64_t> seed;
  std::optional<int> k_max;
  std::optional<int> max_iter;
  std::optional<double> tol_feas, tol_gap, tol_cert, tol_rank, tol_extraction;
  bool timings = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_formulation) {
  cmd->add_option("--json", f.json_path, "write the JSON report to this path");
  if (with_formulation) {
    cmd->add_option("--formulation", f.formulation, "cholesky, psd, or both")
        ->check(CLI::IsMember({"cholesky", "psd", "both"}));
    cmd->add_option("--bound", f.bound_path, "JSON matrix file with an upper bound P_u");
    cmd->add_option("--k-max", f.k_max, "relaxation order cap");
  }
  cmd->add_option("--seed", f.seed, "objective coefficient seed");
  cmd->add_option("--max-iter", f.max_iter, "baseline iteration cap");
  cmd->add_option("--tol-feas", f.tol_feas, "sdp feasibility tolerance");
  cmd->add_option("--tol-gap", f.tol_gap, "sdp duality-gap tolerance");
  cmd->add_option("--tol-cert", f.tol_cert, "infeasibility certificate tolerance");
  cmd->add_option("--tol-rank", f.tol_rank, "numerical rank tolerance");
  cmd->add_option("--tol-extraction", f.tol_extraction, "minimizer feasibility tolerance");
  cmd->add_flag("--timings", f.timings, "include wall-clock fields in JSON output");
}

void apply_flags(rpop::SolverConfig& cfg, const CommonFlags& f) {
  if (const char* env = std::getenv("RICCATI_POP_SEED"); env && !f.seed) {
    cfg.seed = std::strtoull(env, nullptr, 10);
  }
  if (f.seed) cfg.seed = *f.seed;
  if (!f.formulation.empty()) cfg.formulation = f.formulation;
  if (f.k_max) cfg.k_max = *f.k_max;
  if (f.max_iter) cfg.max_iter = *f.max_iter;
  if (f.tol_feas) cfg.tol_feas = *f.tol_feas;
  if (f.tol_gap) cfg.tol_gap = *f.tol_gap;
  if (f.tol_cert) cfg.tol_cert = *f.tol_cert;
  if (f.tol_rank) cfg.tol_rank = *f.tol_rank;
  if (f.tol_extraction) cfg.tol_extraction = *f.tol_extraction;
  if (f.timings) cfg.timings = true;
}

int emit(const nlohmann::json& report, const CommonFlags& f) {
  if (!f.json_path.empty()) {
    std::ofstream out(f.json_path);
    if (!out) {
      std::cerr << "error: cannot write " << f.json_path << "\n";
      return 1;
    }
    out << report.dump(2) << "\n";
  } else {
    std::cout << rpop::render_report_text(report);
  }
  return report.contains("exit_code") ? report["exit_code"].get<int>() : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"positive semi-definite CARE solver via moment relaxations"};
  app.require_subcommand(1);

  std::string solve_file, lqr_file, baseline_file, bench_only;
  CommonFlags solve_flags, lqr_flags, baseline_flags, bench_flags;

  CLI::App* solve = app.add_subcommand("solve", "decide and compute a PSD solution");
  solve->add_option("file", solve_file, "problem file (kind care or lqr)")->required();
  add_common(solve, solve_flags, true);

  CLI::App* lqr = app.add_subcommand("lqr", "solve an LQR problem via its CARE");
  lqr->add_option("file", lqr_file, "problem file (kind lqr)")->required();
  add_common(lqr, lqr_flags, true);

  CLI::App* baseline = app.add_subcommand("baseline", "run the classical iterative solvers");
  baseline->add_option("file", baseline_file, "problem file (kind care)")->required();
  add_common(baseline, baseline_flags, false);

  CLI::App* bench = app.add_subcommand("bench", "reproduce the five benchmark examples");
  bench->add_option("--only", bench_only, "run a single example (example1..example5)");
  add_common(bench, bench_flags, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 1 : 0;
  }

  try {
    if (solve->parsed()) {
      rpop::ProblemFile pf = rpop::load_problem_file(solve_file);
      apply_flags(pf.config, solve_flags);
      if (!solve_flags.bound_path.empty()) {
        pf.upper_bound = rpop::parse_matrix_file(solve_flags.bound_path);
      }
      return emit(rpop::run_solve_report(pf), solve_flags);
    }
    if (lqr->parsed()) {
      rpop::ProblemFile pf = rpop::load_problem_file(lqr_file);
      apply_flags(pf.config, lqr_flags);
      if (!lqr_flags.bound_path.empty()) {
        pf.upper_bound = rpop::parse_matrix_file(lqr_flags.bound_path);
      }
      return emit(rpop::run_lqr_report(pf), lqr_flags);
    }
    if (baseline->parsed()) {
      rpop::ProblemFile pf = rpop::load_problem_file(baseline_file);
      apply_flags(pf.config, baseline_flags);
      return emit(rpop::run_baseline_report(pf), baseline_flags);
    }
    if (bench->parsed()) {
      rpop::SolverConfig cfg;
      apply_flags(cfg, bench_flags);
      return emit(rpop::run_bench_report(cfg, bench_only), bench_flags);
    }
  } catch (const rpop::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
