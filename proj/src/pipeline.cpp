#include "joingraph/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace joingraph {

namespace {

using ordered_json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs fn, tagging any library error with the stage name.
template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (Error& e) {
    if (e.stage().empty()) e.set_stage(stage);
    throw;
  }
}

std::string prior_text(const PriorSelection& p) {
  switch (p.kind) {
    case ScorerKind::Heuristic: return "heuristic";
    case ScorerKind::ScoreFile: return "score-file:" + p.score_file.generic_string();
    case ScorerKind::Llm: return "llm";
  }
  return "heuristic";
}

std::string oracle_text(const OracleSelection& o) {
  switch (o.kind) {
    case OracleSelection::Kind::None: return "none";
    case OracleSelection::Kind::Mock: return "mock:" + o.mock_fixture.generic_string();
    case OracleSelection::Kind::Http: return "http";
  }
  return "none";
}

ordered_json config_json(const RunConfig& c) {
  ordered_json j;
  j["prior"] = prior_text(c.prior);
  j["oracle"] = oracle_text(c.oracle);
  j["fast"] = c.fast;
  j["seed"] = c.seed;
  j["lambda1"] = c.solver.lambda1;
  j["lambda2"] = c.solver.lambda2;
  j["theta"] = c.solver.theta;
  j["admm_rho"] = c.solver.admm_rho;
  j["max_iters"] = c.solver.max_iters;
  j["rel_tol"] = c.solver.rel_tol;
  j["core_submatrix"] = c.solver.use_core_submatrix;
  j["gamma"] = c.em.gamma;
  j["epsilon"] = c.em.epsilon;
  j["low_threshold"] = c.em.low_threshold;
  j["high_threshold"] = c.em.high_threshold;
  j["delta"] = c.em.delta;
  j["oracle_batch_size"] = c.em.oracle_batch_size;
  j["known_fraction"] = c.known_fraction ? ordered_json(*c.known_fraction) : ordered_json(nullptr);
  return j;
}

ordered_json eval_json(const EvalResult& r) {
  return ordered_json{{"true_positives", r.true_positives},   {"false_positives", r.false_positives},
                      {"false_negatives", r.false_negatives}, {"precision", r.precision},
                      {"recall", r.recall},                   {"f1", r.f1}};
}

ordered_json prune_json(const PruneReport& p) {
  return ordered_json{{"columns_total", p.columns_total},
                      {"columns_dropped_by_type", p.columns_dropped_by_type},
                      {"pairs_enumerated", p.pairs_enumerated},
                      {"dropped_same_table", p.dropped_same_table},
                      {"dropped_type", p.dropped_type},
                      {"dropped_uniqueness", p.dropped_uniqueness},
                      {"dropped_cardinality", p.dropped_cardinality},
                      {"dropped_domain", p.dropped_domain},
                      {"survivors", p.survivors.size()}};
}

std::vector<QueryLogJoin> merge_known(const std::vector<QueryLogJoin>& a, const std::vector<QueryLogJoin>& b) {
  std::set<PairKey> seen;
  std::vector<QueryLogJoin> out;
  for (const auto* list : {&a, &b}) {
    for (const auto& j : *list) {
      const PairKey key = make_pair_key(j.left, j.right);
      if (seen.insert(key).second) out.push_back({key.first, key.second});
    }
  }
  return out;
}

}  // namespace

OracleSelection parse_oracle_selection(const std::string& text) {
  OracleSelection s;
  if (text == "http") {
    s.kind = OracleSelection::Kind::Http;
  } else if (text.rfind("mock:", 0) == 0 && text.size() > 5) {
    s.kind = OracleSelection::Kind::Mock;
    s.mock_fixture = text.substr(5);
  } else if (text == "none" || text.empty()) {
    s.kind = OracleSelection::Kind::None;
  } else {
    throw RangeError("unknown oracle '" + text + "' (expected mock:<path> or http)");
  }
  return s;
}

PriorSelection parse_prior_selection(const std::string& text) {
  PriorSelection p;
  if (text == "heuristic") {
    p.kind = ScorerKind::Heuristic;
  } else if (text == "llm") {
    p.kind = ScorerKind::Llm;
  } else if (text.rfind("score-file:", 0) == 0 && text.size() > 11) {
    p.kind = ScorerKind::ScoreFile;
    p.score_file = text.substr(11);
  } else {
    throw RangeError("unknown prior '" + text + "' (expected heuristic, score-file:<path> or llm)");
  }
  return p;
}

RunConfig RunConfig::normalized() const {
  RunConfig c = *this;
  if (c.fast) {
    c.em.gamma = 1;
    c.solver.use_core_submatrix = true;
  }
  return c;
}

RunInputs load_inputs(const RunConfig& cfg) {
  return in_stage("ingestion", [&] {
    RunInputs in;
    in.columns = load_schema_file(cfg.schema_path);
    const ColumnIndex index = build_column_index(in.columns);
    if (cfg.query_log_path) {
      QueryLogLoad log = load_query_log(*cfg.query_log_path, index);
      in.known = std::move(log.joins);
      in.warnings.insert(in.warnings.end(), log.warnings.begin(), log.warnings.end());
    }
    if (cfg.truth_path) {
      GroundTruthLoad truth = load_ground_truth(*cfg.truth_path, index);
      in.truth = std::move(truth.truth);
      in.warnings.insert(in.warnings.end(), truth.warnings.begin(), truth.warnings.end());
    }
    if (cfg.known_fraction) {
      if (!in.truth) throw RangeError("a known-join fraction needs ground truth");
      std::vector<QueryLogJoin> sampled = sample_known_joins(*in.truth, *cfg.known_fraction, cfg.seed);
      in.known = merge_known(in.known, sampled);
    }
    if (cfg.prior.kind == ScorerKind::ScoreFile) in.score_file_text = read_text_file(cfg.prior.score_file);
    return in;
  });
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::QueryLog: return "query_log";
    case Provenance::PromotedByEm: return "promoted_by_em";
    case Provenance::Completion: return "completion";
  }
  return "completion";
}

JoinGraphReport run_pipeline(const RunConfig& raw_cfg, const RunInputs& inputs, SemanticOracle* oracle) {
  const auto start = Clock::now();
  JoinGraphReport report;
  report.config = raw_cfg.normalized();
  const RunConfig& cfg = report.config;
  report.warnings = inputs.warnings;
  in_stage("configuration", [&] {
    cfg.solver.validate();
    cfg.em.validate();
  });

  auto t = Clock::now();
  report.index = in_stage("ingestion", [&] { return build_column_index(inputs.columns); });
  const ColumnId n = report.index.size();
  report.times.ingest = seconds_since(t);

  t = Clock::now();
  ProbabilityMatrix skeleton = in_stage("pruning", [&] {
    const std::vector<ColumnId> eligible = filter_joinable_columns(inputs.columns);
    report.prune = prune_pairs(inputs.columns, eligible);
    return build_initial_mask(n, report.prune.survivors, inputs.known);
  });
  report.times.prune = seconds_since(t);

  // Known joins are observed; only the remaining candidates get a prior.
  std::vector<CandidatePair> latent;
  for (const auto& c : report.prune.survivors) {
    if (skeleton.mask.latent(c.i, c.j)) latent.push_back(c);
  }
  report.latent_pairs = latent.size();

  t = Clock::now();
  const ProbabilityMatrix s0 = in_stage("scoring", [&] {
    ScoreMap scores;
    switch (cfg.prior.kind) {
      case ScorerKind::Heuristic:
        scores = heuristic_scores(inputs.columns, latent);
        break;
      case ScorerKind::ScoreFile: {
        if (!inputs.score_file_text) throw IoError("score file prior selected but no score file was read");
        ScoreFileLoad load = parse_score_file_json(*inputs.score_file_text, report.index, latent);
        report.warnings.insert(report.warnings.end(), load.warnings.begin(), load.warnings.end());
        scores = std::move(load.scores);
        break;
      }
      case ScorerKind::Llm:
        if (!latent.empty()) {
          if (!oracle) throw RangeError("the llm prior needs an oracle");
          scores = to_score_map(llm_score_batch(latent, report.index, *oracle, cfg.llm));
        }
        break;
    }
    return fill_probability_matrix(skeleton, scores);
  });
  report.times.score = seconds_since(t);

  t = Clock::now();
  ProbabilityMatrix final_s = s0;
  in_stage("inference", [&] {
    if (cfg.fast || s0.mask.latent_count() == 0) {
      SolveResult solved = solve(s0, cfg.solver);
      report.trace.iterations.push_back(EmIteration{0, std::nullopt, s0.mask.latent_count(), solved.stats, std::nullopt});
      report.trace.exit_reason = cfg.fast ? "fast_mode" : "no_candidates";
      report.m = std::move(solved.m);
    } else {
      if (!oracle) throw RangeError("EM refinement needs an oracle (use --oracle or --fast)");
      EmResult em = em_infer(s0, cfg.em, cfg.solver, *oracle, report.index);
      report.m = std::move(em.m);
      report.trace = std::move(em.trace);
      final_s = std::move(em.s);
    }
    report.decisions = threshold_decisions(report.m, final_s.mask, cfg.solver.theta);
  });
  report.times.infer = seconds_since(t);

  for (ColumnId i = 0; i < n; ++i) {
    for (ColumnId j = i + 1; j < n; ++j) {
      if (report.decisions.adjacency(i, j) <= 0.0) continue;
      Provenance p = Provenance::Completion;
      if (s0.mask.observed(i, j)) {
        p = Provenance::QueryLog;
      } else if (final_s.mask.observed(i, j)) {
        p = Provenance::PromotedByEm;
      }
      report.edges.push_back({i, j, p, report.m.values(i, j)});
    }
  }

  if (inputs.truth) report.metrics = in_stage("evaluation", [&] { return evaluate(report.decisions, *inputs.truth); });
  report.times.total = seconds_since(start);
  return report;
}

std::unique_ptr<SemanticOracle> make_oracle(const OracleSelection& selection) {
  return in_stage("oracle", [&]() -> std::unique_ptr<SemanticOracle> {
    switch (selection.kind) {
      case OracleSelection::Kind::None:
        return nullptr;
      case OracleSelection::Kind::Mock:
        return std::make_unique<MockOracle>(MockOracle::from_file(selection.mock_fixture));
      case OracleSelection::Kind::Http: {
        if (selection.url.empty()) throw RangeError("--oracle http needs --oracle-url");
        std::string tmpl;
        if (!selection.prompt_template.empty()) tmpl = read_text_file(selection.prompt_template);
        return std::make_unique<HttpOracle>(HttpOracle::from_environment(selection.url, std::move(tmpl)));
      }
    }
    return nullptr;
  });
}

JoinGraphReport run_infer(const RunConfig& cfg) {
  const RunInputs inputs = load_inputs(cfg);
  const auto oracle = make_oracle(cfg.oracle);
  return run_pipeline(cfg, inputs, oracle.get());
}

std::string report_json(const JoinGraphReport& r) {
  ordered_json j;
  j["config"] = config_json(r.config);
  ordered_json columns = ordered_json::array();
  for (const auto& ref : r.index.refs()) columns.push_back(ref.qualified_name());
  j["columns"] = std::move(columns);
  j["prune"] = prune_json(r.prune);
  j["latent_pairs"] = r.latent_pairs;

  ordered_json counts{{"query_log", 0}, {"promoted_by_em", 0}, {"completion", 0}};
  ordered_json edges = ordered_json::array();
  for (const auto& e : r.edges) {
    const std::string tag(to_string(e.provenance));
    counts[tag] = counts[tag].get<std::size_t>() + 1;
    edges.push_back(ordered_json{{"left", r.index.at(e.i).qualified_name()},
                                 {"right", r.index.at(e.j).qualified_name()},
                                 {"provenance", tag},
                                 {"value", e.value}});
  }
  j["edge_count"] = r.edges.size();
  j["provenance_counts"] = std::move(counts);
  j["edges"] = std::move(edges);
  j["em"] = ordered_json{{"e_steps", r.trace.iterations.size()},
                         {"exit_reason", r.trace.exit_reason},
                         {"degraded", r.trace.degraded}};
  if (r.metrics) j["metrics"] = eval_json(*r.metrics);
  if (!r.warnings.empty()) j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

std::string prune_report_json(const PruneReport& prune) { return prune_json(prune).dump(2) + "\n"; }

std::string stats_json(const JoinGraphReport& r) {
  ordered_json j;
  j["seconds"] = ordered_json{{"ingest", r.times.ingest}, {"prune", r.times.prune}, {"score", r.times.score},
                              {"infer", r.times.infer},   {"total", r.times.total}};
  j["prune"] = prune_json(r.prune);
  ordered_json its = ordered_json::array();
  for (const auto& it : r.trace.iterations) {
    ordered_json e;
    e["t"] = it.t;
    e["frobenius_delta"] = it.frobenius_delta ? ordered_json(*it.frobenius_delta) : ordered_json(nullptr);
    e["latent_before"] = it.latent_before;
    e["solve"] = ordered_json{{"iterations", it.solve.iterations},
                              {"converged", it.solve.converged},
                              {"primal_residual", it.solve.primal_residual},
                              {"dual_residual", it.solve.dual_residual},
                              {"objective", it.solve.objective},
                              {"numerical_rank", it.solve.numerical_rank},
                              {"solved_size", it.solve.solved_size},
                              {"seconds", it.solve.wall_seconds}};
    if (it.m_step) {
      const MStepStats& m = *it.m_step;
      e["m_step"] = ordered_json{{"candidates", m.candidates},
                                 {"promoted", m.promoted},
                                 {"boosted", m.boosted},
                                 {"decayed", m.decayed},
                                 {"untouched_on_failure", m.untouched_on_failure},
                                 {"annotate_requests", m.annotate_requests},
                                 {"match_requests", m.match_requests},
                                 {"failures", m.failures},
                                 {"oracle_unreachable", m.oracle_unreachable}};
    }
    its.push_back(std::move(e));
  }
  j["em_iterations"] = std::move(its);
  j["exit_reason"] = r.trace.exit_reason;
  j["degraded"] = r.trace.degraded;
  return j.dump(2) + "\n";
}

ReportEdges parse_report_edges(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text.begin(), text.end());
  } catch (const ordered_json::parse_error& e) {
    throw FormatError(std::string("report: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("columns") || !doc["columns"].is_array() || !doc.contains("edges") ||
      !doc["edges"].is_array()) {
    throw FormatError("report: expected an object with \"columns\" and \"edges\" arrays");
  }
  std::vector<ColumnMeta> columns;
  for (const auto& c : doc["columns"]) {
    if (!c.is_string()) throw FormatError("report: column names must be strings");
    const ColumnRef ref = parse_column_ref(c.get<std::string>());
    ColumnMeta meta;
    meta.table_name = ref.table;
    meta.column_name = ref.column;
    columns.push_back(std::move(meta));
  }
  ReportEdges out;
  out.index = build_column_index(columns);
  for (const auto& e : doc["edges"]) {
    if (!e.is_object() || !e.contains("left") || !e.contains("right") || !e["left"].is_string() ||
        !e["right"].is_string()) {
      throw FormatError("report: edges need string \"left\" and \"right\"");
    }
    const auto a = out.index.find(e["left"].get<std::string>());
    const auto b = out.index.find(e["right"].get<std::string>());
    if (!a || !b) throw FormatError("report: edge endpoint missing from the column list");
    out.edges.push_back(make_pair_key(*a, *b));
  }
  return out;
}

std::vector<SweepPoint> expand_grid(const SweepGrid& grid, const RunConfig& base) {
  const auto axis = [](const std::vector<double>& v, double fallback) {
    return v.empty() ? std::vector<double>{fallback} : v;
  };
  const auto l1 = axis(grid.lambda1, base.solver.lambda1);
  const auto l2 = axis(grid.lambda2, base.solver.lambda2);
  const auto th = axis(grid.theta, base.solver.theta);
  const auto hi = axis(grid.high_threshold, base.em.high_threshold);
  const auto kf = axis(grid.known_fraction, base.known_fraction.value_or(0.0));
  std::vector<SweepPoint> points;
  for (double a : l1)
    for (double b : l2)
      for (double c : th)
        for (double d : hi)
          for (double e : kf) points.push_back({points.size(), a, b, c, d, e});
  return points;
}

std::vector<SweepRow> run_sweep(const RunConfig& base, const SweepGrid& grid, const RunInputs& inputs,
                                SemanticOracle* oracle, std::size_t workers) {
  if (!inputs.truth) throw RangeError("sweep needs ground truth");
  const std::vector<SweepPoint> points = expand_grid(grid, base);
  if (points.empty()) throw EmptyInput("sweep grid is empty");
  std::vector<SweepRow> rows(points.size());

  const auto run_point = [&](std::size_t k) {
    SweepRow& row = rows[k];
    row.point = points[k];
    try {
      RunConfig cfg = base;
      cfg.solver.lambda1 = row.point.lambda1;
      cfg.solver.lambda2 = row.point.lambda2;
      cfg.solver.theta = row.point.theta;
      cfg.em.high_threshold = row.point.high_threshold;
      cfg.known_fraction = row.point.known_fraction;
      RunInputs in = inputs;
      in.known = merge_known(inputs.known, sample_known_joins(*inputs.truth, row.point.known_fraction, base.seed));
      row.result = run_pipeline(cfg, in, oracle).metrics;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  };

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, points.size());
  if (workers <= 1) {
    for (std::size_t k = 0; k < points.size(); ++k) run_point(k);
    return rows;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < points.size(); k = next++) run_point(k);
    });
  }
  for (auto& th : pool) th.join();
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os.precision(10);
  os << "index,lambda1,lambda2,theta,high_threshold,known_fraction,true_positives,false_positives,"
        "false_negatives,precision,recall,f1,error\n";
  for (const auto& row : rows) {
    const SweepPoint& p = row.point;
    os << p.index << ',' << p.lambda1 << ',' << p.lambda2 << ',' << p.theta << ',' << p.high_threshold << ','
       << p.known_fraction << ',';
    if (row.result) {
      const EvalResult& r = *row.result;
      os << r.true_positives << ',' << r.false_positives << ',' << r.false_negatives << ',' << r.precision << ','
         << r.recall << ',' << r.f1 << ',';
    } else {
      os << ",,,,,,";
    }
    std::string error = row.error;
    std::replace(error.begin(), error.end(), '"', '\'');
    std::replace(error.begin(), error.end(), '\n', ' ');
    if (!error.empty()) os << '"' << error << '"';
    os << '\n';
  }
  return os.str();
}

SweepFile parse_sweep_config(std::string_view text, const std::filesystem::path& base_dir) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("sweep config: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("sweep config must be a JSON object");
  const auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  const auto string_field = [&](const char* key) -> std::optional<std::string> {
    if (!doc.contains(key)) return std::nullopt;
    if (!doc[key].is_string()) throw FormatError(std::string("sweep config: \"") + key + "\" must be a string");
    return doc[key].get<std::string>();
  };

  SweepFile out;
  RunConfig& c = out.base;
  const auto schema = string_field("schema");
  const auto truth = string_field("truth");
  if (!schema || !truth) throw FormatError("sweep config needs \"schema\" and \"truth\"");
  c.schema_path = resolve(*schema);
  c.truth_path = resolve(*truth);
  if (auto q = string_field("query_log")) c.query_log_path = resolve(*q);
  if (auto p = string_field("prior")) {
    c.prior = parse_prior_selection(*p);
    if (c.prior.kind == ScorerKind::ScoreFile) c.prior.score_file = resolve(c.prior.score_file.string());
  }
  if (auto o = string_field("oracle")) {
    c.oracle = parse_oracle_selection(*o);
    if (c.oracle.kind == OracleSelection::Kind::Mock) c.oracle.mock_fixture = resolve(c.oracle.mock_fixture.string());
  }
  if (auto u = string_field("oracle_url")) c.oracle.url = *u;
  try {
    if (doc.contains("fast")) c.fast = doc["fast"].get<bool>();
    if (doc.contains("seed")) c.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("gamma")) c.em.gamma = doc["gamma"].get<int>();
    if (doc.contains("workers")) out.workers = doc["workers"].get<std::size_t>();
    if (doc.contains("grid")) {
      const auto& g = doc["grid"];
      if (!g.is_object()) throw FormatError("sweep config: \"grid\" must be an object");
      for (const auto& [key, value] : g.items()) {
        std::vector<double> v = value.get<std::vector<double>>();
        if (key == "lambda1") out.grid.lambda1 = std::move(v);
        else if (key == "lambda2") out.grid.lambda2 = std::move(v);
        else if (key == "theta") out.grid.theta = std::move(v);
        else if (key == "high_threshold") out.grid.high_threshold = std::move(v);
        else if (key == "known_fraction") out.grid.known_fraction = std::move(v);
        else throw FormatError("sweep config: unknown grid axis \"" + key + "\"");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("sweep config: ") + e.what());
  }
  return out;
}

}  // namespace joingraph
