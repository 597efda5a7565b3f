#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "joingraph/analysis.hpp"
#include "joingraph/evaluation.hpp"
#include "joingraph/ingestion.hpp"
#include "joingraph/pipeline.hpp"

namespace jg = joingraph;

namespace {

enum Exit { kOk = 0, kUsage = 1, kFormat = 2, kOracle = 3 };

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw jg::IoError("cannot write " + path);
  out << text;
}

std::string eval_text(const jg::EvalResult& r) {
  nlohmann::ordered_json j{{"true_positives", r.true_positives}, {"false_positives", r.false_positives},
                           {"false_negatives", r.false_negatives}, {"precision", r.precision},
                           {"recall", r.recall}, {"f1", r.f1}};
  return j.dump(2) + "\n";
}

struct InferArgs {
  std::string schema, query_log, truth, prior = "heuristic", oracle, oracle_url, prompt_template;
  std::string report, stats;
  bool fast = false;
  double lambda1 = jg::SolverConfig{}.lambda1;
  double lambda2 = jg::SolverConfig{}.lambda2;
  double theta = jg::SolverConfig{}.theta;
  int gamma = jg::EmConfig{}.gamma;
  double high_threshold = jg::EmConfig{}.high_threshold;
  double low_threshold = jg::EmConfig{}.low_threshold;
  std::uint64_t seed = 0;
  double known_fraction = -1.0;
};

int run_infer(const InferArgs& a) {
  jg::RunConfig cfg;
  cfg.schema_path = a.schema;
  if (!a.query_log.empty()) cfg.query_log_path = a.query_log;
  if (!a.truth.empty()) cfg.truth_path = a.truth;
  cfg.prior = jg::parse_prior_selection(a.prior);
  cfg.oracle = jg::parse_oracle_selection(a.oracle);
  cfg.oracle.url = a.oracle_url;
  cfg.oracle.prompt_template = a.prompt_template;
  cfg.fast = a.fast;
  cfg.solver.lambda1 = a.lambda1;
  cfg.solver.lambda2 = a.lambda2;
  cfg.solver.theta = a.theta;
  cfg.em.gamma = a.gamma;
  cfg.em.high_threshold = a.high_threshold;
  cfg.em.low_threshold = a.low_threshold;
  cfg.seed = a.seed;
  if (a.known_fraction >= 0.0) cfg.known_fraction = a.known_fraction;

  const jg::JoinGraphReport report = jg::run_infer(cfg);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  if (report.trace.degraded) std::cerr << "warning: oracle unreachable, EM stopped early\n";
  write_output(a.report, jg::report_json(report));
  if (!a.stats.empty()) write_output(a.stats, jg::stats_json(report));
  return kOk;
}

int run_analyze(const std::vector<std::string>& schemas, const std::vector<std::string>& truths,
                const std::string& cdf_path, std::size_t grid_points) {
  if (schemas.size() != truths.size()) throw jg::RangeError("give one --truth per --schema");
  std::vector<jg::GraphStats> stats;
  for (std::size_t k = 0; k < schemas.size(); ++k) {
    const auto columns = jg::load_schema_file(schemas[k]);
    const auto index = jg::build_column_index(columns);
    const auto truth = jg::load_ground_truth(truths[k], index);
    for (const auto& w : truth.warnings) std::cerr << "warning: " << w << "\n";
    stats.push_back(jg::graph_stats(columns, truth.truth));
  }
  if (stats.size() == 1) {
    std::cout << jg::graph_stats_json(stats.front());
  } else {
    nlohmann::ordered_json j;
    j["schemas"] = nlohmann::ordered_json::array();
    for (const auto& s : stats) j["schemas"].push_back(nlohmann::ordered_json::parse(jg::graph_stats_json(s)));
    const auto summary = jg::summarize_collection(stats, jg::linear_grid(0.0, 1.0, grid_points));
    j["summary"] = nlohmann::ordered_json::parse(jg::collection_summary_json(summary));
    std::cout << j.dump(2) << "\n";
  }
  if (!cdf_path.empty()) {
    write_output(cdf_path, jg::cdf_csv(jg::summarize_collection(stats, jg::linear_grid(0.0, 1.0, grid_points))));
  }
  return kOk;
}

int run_eval(const std::string& report_path, const std::string& truth_path) {
  const jg::ReportEdges report = jg::parse_report_edges(jg::read_text_file(report_path));
  const auto truth = jg::parse_ground_truth_json(jg::read_text_file(truth_path), report.index);
  for (const auto& w : truth.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << eval_text(jg::evaluate_edges(report.edges, truth.truth, report.index.size()));
  return kOk;
}

int run_sweep(const std::string& config_path, const std::string& out_path) {
  const std::filesystem::path path(config_path);
  const jg::SweepFile sweep = jg::parse_sweep_config(jg::read_text_file(path), path.parent_path());
  const jg::RunInputs inputs = jg::load_inputs(sweep.base);
  const auto oracle = jg::make_oracle(sweep.base.oracle);
  const auto rows = jg::run_sweep(sweep.base, sweep.grid, inputs, oracle.get(), sweep.workers);
  write_output(out_path, jg::sweep_csv(rows));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Join graph inference from schema metadata"};
  app.require_subcommand(1);

  InferArgs infer;
  auto* cmd_infer = app.add_subcommand("infer", "Infer the join graph of a schema");
  cmd_infer->add_option("--schema", infer.schema, "Schema metadata JSON")->required();
  cmd_infer->add_option("--query-log", infer.query_log, "Known joins JSON");
  cmd_infer->add_option("--truth", infer.truth, "Ground-truth edges; adds metrics to the report");
  cmd_infer->add_option("--prior", infer.prior, "heuristic | score-file:<path> | llm");
  cmd_infer->add_option("--oracle", infer.oracle, "mock:<fixture> | http");
  cmd_infer->add_option("--oracle-url", infer.oracle_url, "Base URL of the HTTP oracle");
  cmd_infer->add_option("--prompt-template", infer.prompt_template, "Prompt template for the HTTP oracle");
  cmd_infer->add_flag("--fast", infer.fast, "Single solve on the core submatrix, no EM");
  cmd_infer->add_option("--lambda1", infer.lambda1, "Nuclear-norm weight");
  cmd_infer->add_option("--lambda2", infer.lambda2, "L1 weight");
  cmd_infer->add_option("--theta", infer.theta, "Decision threshold");
  cmd_infer->add_option("--gamma", infer.gamma, "Maximum EM iterations");
  cmd_infer->add_option("--high-threshold", infer.high_threshold, "Promotion threshold");
  cmd_infer->add_option("--low-threshold", infer.low_threshold, "Minimum value for an oracle check");
  cmd_infer->add_option("--seed", infer.seed, "Seed for known-join sampling");
  cmd_infer->add_option("--known-fraction", infer.known_fraction, "Sample this fraction of --truth as known joins");
  cmd_infer->add_option("--report", infer.report, "Report path (default stdout)");
  cmd_infer->add_option("--stats", infer.stats, "Timing and solver statistics path");

  std::vector<std::string> schemas, truths;
  std::string cdf_path;
  std::size_t grid_points = 200;
  auto* cmd_analyze = app.add_subcommand("analyze", "Density and normalized rank of ground-truth join graphs");
  cmd_analyze->add_option("--schema", schemas, "Schema metadata JSON (repeatable)")->required();
  cmd_analyze->add_option("--truth", truths, "Ground-truth edges (one per --schema)")->required();
  cmd_analyze->add_option("--cdf-csv", cdf_path, "Write density / normalized-rank CDFs as CSV");
  cmd_analyze->add_option("--grid-points", grid_points, "CDF grid size")->check(CLI::PositiveNumber);

  std::string report_path, truth_path;
  auto* cmd_eval = app.add_subcommand("eval", "Precision, recall and F1 of a report");
  cmd_eval->add_option("--report", report_path, "Report JSON from infer")->required();
  cmd_eval->add_option("--truth", truth_path, "Ground-truth edges")->required();

  std::string sweep_config, sweep_out;
  auto* cmd_sweep = app.add_subcommand("sweep", "Evaluate a configuration grid");
  cmd_sweep->add_option("--config", sweep_config, "Sweep configuration JSON")->required();
  cmd_sweep->add_option("--out", sweep_out, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*cmd_infer) return run_infer(infer);
    if (*cmd_analyze) return run_analyze(schemas, truths, cdf_path, grid_points);
    if (*cmd_eval) return run_eval(report_path, truth_path);
    if (*cmd_sweep) return run_sweep(sweep_config, sweep_out);
  } catch (const jg::OracleError& e) {
    std::cerr << "error" << (e.stage().empty() ? "" : " [" + e.stage() + "]") << ": " << e.what() << "\n";
    return kOracle;
  } catch (const jg::ProtocolError& e) {
    std::cerr << "error" << (e.stage().empty() ? "" : " [" + e.stage() + "]") << ": " << e.what() << "\n";
    return kOracle;
  } catch (const jg::RangeError& e) {
    // Out-of-range values inside input files are format errors; elsewhere they came from flags.
    std::cerr << "error" << (e.stage().empty() ? "" : " [" + e.stage() + "]") << ": " << e.what() << "\n";
    return e.stage() == "ingestion" || e.stage() == "scoring" ? kFormat : kUsage;
  } catch (const jg::Error& e) {
    std::cerr << "error" << (e.stage().empty() ? "" : " [" + e.stage() + "]") << ": " << e.what() << "\n";
    return kFormat;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFormat;
  }
  return kUsage;
}
