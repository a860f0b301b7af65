#include "rpop/io.hpp"

#include <chrono>
#include <fstream>
#include <future>
#include <sstream>

#include "rpop/fixtures.hpp"

namespace rpop {

using nlohmann::json;

namespace {

Eigen::MatrixXd parse_matrix(const json& j, const std::string& field) {
  if (!j.is_object()) throw ParseError("field '" + field + "': expected an object");
  for (const char* key : {"rows", "cols", "data"}) {
    if (!j.contains(key)) throw ParseError("field '" + field + "': missing '" + key + "'");
  }
  if (!j["rows"].is_number_integer() || !j["cols"].is_number_integer()) {
    throw ParseError("field '" + field + "': rows/cols must be integers");
  }
  const int rows = j["rows"].get<int>(), cols = j["cols"].get<int>();
  if (rows <= 0 || cols <= 0) throw ParseError("field '" + field + "': nonpositive dimension");
  if (!j["data"].is_array() || static_cast<int>(j["data"].size()) != rows * cols) {
    std::ostringstream os;
    os << "field '" << field << "': expected " << rows * cols << " row-major values";
    if (j["data"].is_array()) os << ", got " << j["data"].size();
    throw ParseError(os.str());
  }
  Eigen::MatrixXd M(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int k = 0; k < cols; ++k) {
      const auto& v = j["data"][i * cols + k];
      if (!v.is_number()) throw ParseError("field '" + field + "': non-numeric entry");
      M(i, k) = v.get<double>();
    }
  }
  return M;
}

SolverConfig parse_config(const json& j) {
  SolverConfig cfg;
  if (!j.is_object()) throw ParseError("field 'config': expected an object");
  if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
  if (j.contains("k_max")) cfg.k_max = j["k_max"].get<int>();
  if (j.contains("formulation")) {
    cfg.formulation = j["formulation"].get<std::string>();
    if (cfg.formulation != "cholesky" && cfg.formulation != "psd" && cfg.formulation != "both") {
      throw ParseError("field 'config.formulation': must be cholesky, psd, or both");
    }
  }
  if (j.contains("max_iter")) cfg.max_iter = j["max_iter"].get<int>();
  if (j.contains("timings")) cfg.timings = j["timings"].get<bool>();
  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    if (t.contains("feas")) cfg.tol_feas = t["feas"].get<double>();
    if (t.contains("gap")) cfg.tol_gap = t["gap"].get<double>();
    if (t.contains("cert")) cfg.tol_cert = t["cert"].get<double>();
    if (t.contains("rank")) cfg.tol_rank = t["rank"].get<double>();
    if (t.contains("extraction")) cfg.tol_extraction = t["extraction"].get<double>();
  }
  return cfg;
}

json config_to_json(const SolverConfig& cfg) {
  json t = {{"feas", cfg.tol_feas}, {"gap", cfg.tol_gap},      {"cert", cfg.tol_cert},
            {"rank", cfg.tol_rank}, {"extraction", cfg.tol_extraction}};
  return json{{"seed", cfg.seed},         {"k_max", cfg.k_max},
              {"formulation", cfg.formulation}, {"max_iter", cfg.max_iter},
              {"timings", cfg.timings},   {"tolerances", t}};
}

std::vector<Formulation> formulations_of(const SolverConfig& cfg) {
  if (cfg.formulation == "cholesky") return {Formulation::Cholesky};
  if (cfg.formulation == "psd") return {Formulation::Psd};
  return {Formulation::Cholesky, Formulation::Psd};
}

json relaxation_log_json(const RelaxationResult& rr) {
  json log = json::array();
  for (const auto& entry : rr.log) {
    json e = {{"k", entry.k},
              {"status", to_string(entry.status)},
              {"lower_bound", entry.lower_bound},
              {"sdp_iterations", entry.sdp_iterations}};
    e["moment_ranks"] = entry.moment_ranks;
    log.push_back(std::move(e));
  }
  return log;
}

json outcome_json(const CareOutcome& oc, bool timings) {
  json r;
  r["formulation"] = to_string(oc.formulation);
  r["verdict"] = to_string(oc.verdict);
  r["order"] = oc.order;
  if (oc.verdict == CareVerdict::Solved) {
    r["P"] = matrix_to_json(oc.P);
    r["residual"] = oc.residual_norm;
    r["stabilizing"] = oc.stabilizing;
    if (oc.all_solutions.size() > 1) {
      json all = json::array();
      for (const auto& P : oc.all_solutions) all.push_back(matrix_to_json(P));
      r["all_solutions"] = std::move(all);
    }
  }
  r["objective_coefficients"] = {{"seed", oc.objective.seed},
                                 {"low", oc.objective.coeff_low},
                                 {"high", oc.objective.coeff_high},
                                 {"squares", oc.objective.square_coeffs},
                                 {"crosses", oc.objective.cross_coeffs},
                                 {"linears", oc.objective.linear_coeffs}};
  r["relaxations"] = relaxation_log_json(oc.relaxation);
  if (!oc.relaxation.message.empty()) r["message"] = oc.relaxation.message;
  if (oc.relaxation.flat_at) r["flat_at"] = *oc.relaxation.flat_at;
  if (timings) r["wall_seconds"] = oc.wall_seconds;
  return r;
}

json trace_json(const IterationTrace& tr) {
  json r;
  r["method"] = to_string(tr.method);
  r["converged"] = tr.converged;
  r["iterations"] = tr.iterations;
  r["reason"] = tr.reason;
  if (!tr.residual_history.empty()) r["final_residual"] = tr.residual_history.back();
  if (tr.P && tr.converged) r["P"] = matrix_to_json(*tr.P);
  return r;
}

std::vector<IterationTrace> run_baselines(const CareProblem& care, int max_iter) {
  return {newton_kleinman(care, Eigen::MatrixXd::Zero(care.n, care.n), max_iter),
          matrix_sign(care, max_iter), sda(care, max_iter), schur_method(care)};
}

json baselines_json(const CareProblem& care, const std::vector<IterationTrace>& traces) {
  json r;
  json list = json::array();
  for (const auto& tr : traces) list.push_back(trace_json(tr));
  r["traces"] = std::move(list);
  // pairwise max-abs disagreement between converged solutions
  json agreement = json::object();
  for (size_t i = 0; i < traces.size(); ++i) {
    for (size_t j = i + 1; j < traces.size(); ++j) {
      if (traces[i].converged && traces[j].converged && traces[i].P && traces[j].P) {
        const double diff = (*traces[i].P - *traces[j].P).cwiseAbs().maxCoeff();
        agreement[to_string(traces[i].method) + "/" + to_string(traces[j].method)] = diff;
      }
    }
  }
  r["agreement"] = std::move(agreement);
  (void)care;
  return r;
}

json solve_problem_json(const CareProblem& care, const std::optional<UpperBound>& bound,
                        const SolverConfig& cfg) {
  json results = json::array();
  std::vector<CareVerdict> verdicts;
  for (Formulation f : formulations_of(cfg)) {
    ObjectiveSpec obj;
    obj.seed = cfg.seed;
    const CareOutcome oc = solve_care(care, f, obj, bound, params_from_config(cfg, f));
    verdicts.push_back(oc.verdict);
    results.push_back(outcome_json(oc, cfg.timings));
  }
  json r;
  r["results"] = std::move(results);
  r["exit_code"] = exit_code_for(verdicts);
  return r;
}

}  // namespace

json matrix_to_json(const Eigen::MatrixXd& M) {
  json data = json::array();
  for (int i = 0; i < M.rows(); ++i) {
    for (int j = 0; j < M.cols(); ++j) data.push_back(M(i, j));
  }
  return json{{"rows", M.rows()}, {"cols", M.cols()}, {"data", std::move(data)}};
}

ProblemFile parse_problem_file(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid json: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("top level: expected an object");
  ProblemFile pf;
  if (!j.contains("schema_version")) throw ParseError("missing field 'schema_version'");
  pf.schema_version = j["schema_version"].get<std::string>();
  if (pf.schema_version != "1") throw ParseError("field 'schema_version': unsupported version");
  if (!j.contains("kind")) throw ParseError("missing field 'kind'");
  pf.kind = j["kind"].get<std::string>();
  if (pf.kind == "care") {
    for (const char* f : {"A", "R", "Q"}) {
      if (!j.contains(f)) throw ParseError(std::string("missing field '") + f + "' for kind care");
    }
    pf.A = parse_matrix(j["A"], "A");
    pf.R = parse_matrix(j["R"], "R");
    pf.Q = parse_matrix(j["Q"], "Q");
  } else if (pf.kind == "lqr") {
    for (const char* f : {"A", "B", "C", "W"}) {
      if (!j.contains(f)) throw ParseError(std::string("missing field '") + f + "' for kind lqr");
    }
    pf.A = parse_matrix(j["A"], "A");
    pf.B = parse_matrix(j["B"], "B");
    pf.C = parse_matrix(j["C"], "C");
    pf.W = parse_matrix(j["W"], "W");
  } else {
    throw ParseError("field 'kind': must be \"care\" or \"lqr\"");
  }
  if (j.contains("upper_bound")) pf.upper_bound = parse_matrix(j["upper_bound"], "upper_bound");
  if (j.contains("config")) pf.config = parse_config(j["config"]);
  return pf;
}

ProblemFile load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem_file(ss.str());
}

Eigen::MatrixXd parse_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid json: ") + e.what());
  }
  return parse_matrix(j, path);
}

json problem_to_json(const ProblemFile& pf) {
  json j;
  j["schema_version"] = pf.schema_version;
  j["kind"] = pf.kind;
  if (pf.kind == "care") {
    j["A"] = matrix_to_json(pf.A);
    j["R"] = matrix_to_json(pf.R);
    j["Q"] = matrix_to_json(pf.Q);
  } else {
    j["A"] = matrix_to_json(pf.A);
    j["B"] = matrix_to_json(pf.B);
    j["C"] = matrix_to_json(pf.C);
    j["W"] = matrix_to_json(pf.W);
  }
  if (pf.upper_bound) j["upper_bound"] = matrix_to_json(*pf.upper_bound);
  j["config"] = config_to_json(pf.config);
  return j;
}

CareProblem care_from_file(const ProblemFile& pf) {
  if (pf.kind == "care") return make_care(pf.A, pf.R, pf.Q);
  return build_care_from_lqr(LqrProblem{pf.A, pf.B, pf.C, pf.W});
}

HierarchyParams params_from_config(const SolverConfig& cfg, Formulation formulation) {
  HierarchyParams params;
  params.k_start = formulation == Formulation::Cholesky ? 2 : 1;
  params.k_max = cfg.k_max;  // 0 resolves to the per-formulation default
  params.rank_tol = cfg.tol_rank;
  params.extraction_tol = cfg.tol_extraction;
  params.sdp.feas_tol = cfg.tol_feas;
  params.sdp.gap_tol = cfg.tol_gap;
  params.sdp.cert_tol = cfg.tol_cert;
  return params;
}

int exit_code_for(const std::vector<CareVerdict>& verdicts) {
  bool solved = false, infeasible = false, indeterminate = false;
  for (CareVerdict v : verdicts) {
    solved |= v == CareVerdict::Solved;
    infeasible |= v == CareVerdict::Infeasible;
    indeterminate |= v == CareVerdict::Indeterminate;
  }
  if (solved && infeasible) return 20;  // formulations contradict: no verdict
  if (solved) return 0;
  if (infeasible) return 10;
  return 20;
}

json run_solve_report(const ProblemFile& pf) {
  json r;
  r["command"] = "solve";
  r["problem"] = problem_to_json(pf);
  const CareProblem care = care_from_file(pf);
  std::optional<UpperBound> bound;
  if (pf.upper_bound) bound = UpperBound{*pf.upper_bound, "problem file"};
  r.update(solve_problem_json(care, bound, pf.config));
  return r;
}

json run_lqr_report(const ProblemFile& pf) {
  if (pf.kind != "lqr") throw ParseError("lqr command requires kind \"lqr\"");
  json r = run_solve_report(pf);
  r["command"] = "lqr";
  const LqrProblem lqr{pf.A, pf.B, pf.C, pf.W};
  const CareProblem care = build_care_from_lqr(lqr);
  r["care"] = {{"R", matrix_to_json(care.R)}, {"Q", matrix_to_json(care.Q)}};
  for (auto& res : r["results"]) {
    if (res["verdict"] == "solved") {
      const json& pj = res["P"];
      Eigen::MatrixXd P(pj["rows"].get<int>(), pj["cols"].get<int>());
      for (int i = 0; i < P.rows(); ++i) {
        for (int j = 0; j < P.cols(); ++j) P(i, j) = pj["data"][i * P.cols() + j].get<double>();
      }
      res["gain"] = matrix_to_json(feedback_gain(lqr, P));
    }
  }
  return r;
}

json run_baseline_report(const ProblemFile& pf) {
  if (pf.kind != "care") throw ParseError("baseline command requires kind \"care\"");
  json r;
  r["command"] = "baseline";
  r["problem"] = problem_to_json(pf);
  const CareProblem care = care_from_file(pf);
  r.update(baselines_json(care, run_baselines(care, pf.config.max_iter)));
  r["exit_code"] = 0;
  return r;
}

json run_bench_report(const SolverConfig& config, const std::string& only) {
  json r;
  r["command"] = "bench";
  r["config"] = config_to_json(config);

  std::vector<const ExampleFixture*> selected;
  for (const auto& ex : paper_examples()) {
    if (only.empty() || ex.name == only) selected.push_back(&ex);
  }
  if (selected.empty()) throw ParseError("unknown example selector: " + only);

  auto run_one = [&config](const ExampleFixture* ex) {
    json e;
    e["name"] = ex->name;
    e["expected"] = to_string(ex->expected);
    const auto t0 = std::chrono::steady_clock::now();
    json solve = solve_problem_json(ex->care, ex->bound, config);
    e["results"] = solve["results"];
    e["exit_code"] = solve["exit_code"];
    e.update(baselines_json(ex->care, run_baselines(ex->care, config.max_iter)));
    if (config.timings) {
      e["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    return e;
  };

  // examples are independent; outputs are assembled in fixture order
  std::vector<std::future<json>> futures;
  futures.reserve(selected.size());
  for (const auto* ex : selected) {
    futures.push_back(std::async(std::launch::async, run_one, ex));
  }
  json examples = json::array();
  for (auto& f : futures) examples.push_back(f.get());
  r["examples"] = std::move(examples);

  json summary = json::array();
  for (const auto& e : r["examples"]) {
    json row;
    row["name"] = e["name"];
    for (const auto& res : e["results"]) {
      row[res["formulation"].get<std::string>()] = res["verdict"];
    }
    for (const auto& tr : e["traces"]) {
      row[tr["method"].get<std::string>()] =
          tr["converged"].get<bool>() ? "converged" : "not convergent";
    }
    summary.push_back(std::move(row));
  }
  r["summary"] = std::move(summary);
  return r;
}

namespace {

std::string fmt6(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void render_matrix(std::ostream& os, const json& mj, const std::string& indent) {
  const int rows = mj["rows"].get<int>(), cols = mj["cols"].get<int>();
  for (int i = 0; i < rows; ++i) {
    os << indent << "[";
    for (int j = 0; j < cols; ++j) {
      os << (j ? ", " : " ") << fmt6(mj["data"][i * cols + j].get<double>());
    }
    os << " ]\n";
  }
}

void render_results(std::ostream& os, const json& report) {
  for (const auto& res : report["results"]) {
    os << "formulation " << res["formulation"].get<std::string>() << ": "
       << res["verdict"].get<std::string>() << " (order " << res["order"] << ")\n";
    for (const auto& e : res["relaxations"]) {
      os << "  k=" << e["k"] << " " << e["status"].get<std::string>();
      if (e["status"] == "optimal") {
        os << " bound=" << fmt6(e["lower_bound"].get<double>()) << " ranks=[";
        bool first = true;
        for (const auto& rk : e["moment_ranks"]) {
          os << (first ? "" : ",") << rk;
          first = false;
        }
        os << "]";
      }
      os << "\n";
    }
    if (res["verdict"] == "solved") {
      os << "  residual " << fmt6(res["residual"].get<double>()) << ", "
         << (res["stabilizing"].get<bool>() ? "stabilizing" : "not stabilizing") << "\n  P =\n";
      render_matrix(os, res["P"], "    ");
      if (res.contains("gain")) {
        os << "  gain L* =\n";
        render_matrix(os, res["gain"], "    ");
      }
    }
    if (res.contains("message")) os << "  note: " << res["message"].get<std::string>() << "\n";
    if (res.contains("wall_seconds")) {
      os << "  time " << fmt6(res["wall_seconds"].get<double>()) << " s\n";
    }
  }
}

void render_traces(std::ostream& os, const json& block) {
  os << "baselines:\n";
  for (const auto& tr : block["traces"]) {
    os << "  " << tr["method"].get<std::string>() << ": "
       << (tr["converged"].get<bool>() ? "converged" : "not convergent") << " ("
       << tr["reason"].get<std::string>() << ", " << tr["iterations"] << " iterations";
    if (tr.contains("final_residual")) {
      os << ", final residual " << fmt6(tr["final_residual"].get<double>());
    }
    os << ")\n";
  }
  if (!block["agreement"].empty()) {
    os << "  agreement (max abs difference):\n";
    for (const auto& [key, val] : block["agreement"].items()) {
      os << "    " << key << ": " << fmt6(val.get<double>()) << "\n";
    }
  }
}

}  // namespace

std::string render_report_text(const json& report) {
  std::ostringstream os;
  const std::string cmd = report["command"].get<std::string>();
  if (cmd == "solve" || cmd == "lqr") {
    render_results(os, report);
  } else if (cmd == "baseline") {
    render_traces(os, report);
  } else if (cmd == "bench") {
    for (const auto& e : report["examples"]) {
      os << "=== " << e["name"].get<std::string>() << " (expected "
         << e["expected"].get<std::string>() << ")\n";
      render_results(os, e);
      render_traces(os, e);
      if (e.contains("wall_seconds")) {
        os << "  time " << fmt6(e["wall_seconds"].get<double>()) << " s\n";
      }
    }
    os << "summary:\n";
    for (const auto& row : report["summary"]) {
      os << "  " << row["name"].get<std::string>() << ":";
      for (const char* key : {"cholesky", "psd", "newton", "matrix_sign", "sda", "schur"}) {
        if (row.contains(key)) os << " " << key << "=" << row[key].get<std::string>();
      }
      os << "\n";
    }
  }
  return os.str();
}

}  // namespace rpop
