#include <gtest/gtest.h>

#include <set>

#include "joingraph/pipeline.hpp"
#include "support/fixtures.hpp"
#include "support/suite.hpp"

using namespace joingraph;
using joingraph::testing::data_path;

namespace {

RunConfig tpch_config() {
  RunConfig cfg;
  cfg.schema_path = data_path("tpch/schema.json");
  cfg.query_log_path = data_path("tpch/query_log.json");
  cfg.truth_path = data_path("tpch/truth.json");
  cfg.oracle = parse_oracle_selection("mock:" + data_path("tpch/oracle.json"));
  cfg.em.low_threshold = 0.1;
  return cfg;
}

template <class Fn>
std::string stage_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.stage();
  }
  return "<none>";
}

}  // namespace

TEST(Selections, Parse) {
  EXPECT_EQ(parse_oracle_selection("").kind, OracleSelection::Kind::None);
  EXPECT_EQ(parse_oracle_selection("http").kind, OracleSelection::Kind::Http);
  const auto mock = parse_oracle_selection("mock:fixtures/a.json");
  EXPECT_EQ(mock.kind, OracleSelection::Kind::Mock);
  EXPECT_EQ(mock.mock_fixture, "fixtures/a.json");
  EXPECT_THROW(parse_oracle_selection("carrier-pigeon"), RangeError);
  EXPECT_THROW(parse_oracle_selection("mock:"), RangeError);

  EXPECT_EQ(parse_prior_selection("heuristic").kind, ScorerKind::Heuristic);
  EXPECT_EQ(parse_prior_selection("llm").kind, ScorerKind::Llm);
  const auto file = parse_prior_selection("score-file:s.json");
  EXPECT_EQ(file.kind, ScorerKind::ScoreFile);
  EXPECT_EQ(file.score_file, "s.json");
  EXPECT_THROW(parse_prior_selection("oracle"), RangeError);
}

TEST(RunConfigTest, FastNormalisation) {
  RunConfig cfg;
  cfg.fast = true;
  const RunConfig n = cfg.normalized();
  EXPECT_EQ(n.em.gamma, 1);
  EXPECT_TRUE(n.solver.use_core_submatrix);
}

TEST(RunInfer, TpchRecoversTruth) {
  const JoinGraphReport r = run_infer(tpch_config());
  ASSERT_TRUE(r.metrics.has_value());
  EXPECT_GE(r.metrics->f1, 0.85);
  EXPECT_EQ(r.metrics->f1, 1.0);
  EXPECT_EQ(r.index.size(), 61);
  EXPECT_LE(r.trace.iterations.size(), 5u);
}

TEST(RunInfer, Deterministic) {
  const RunConfig cfg = tpch_config();
  EXPECT_EQ(report_json(run_infer(cfg)), report_json(run_infer(cfg)));
}

TEST(RunInfer, ProvenancePartitionsEdges) {
  const JoinGraphReport r = run_infer(tpch_config());
  const RunInputs inputs = load_inputs(tpch_config());
  std::set<PairKey> logged;
  for (const auto& k : inputs.known) logged.insert(make_pair_key(k.left, k.right));
  std::size_t from_log = 0;
  for (const auto& e : r.edges) {
    EXPECT_LT(e.i, e.j);
    EXPECT_EQ(e.provenance == Provenance::QueryLog, logged.contains({e.i, e.j}));
    from_log += e.provenance == Provenance::QueryLog;
  }
  EXPECT_EQ(from_log, logged.size());
  EXPECT_EQ(to_string(Provenance::PromotedByEm), "promoted_by_em");
}

TEST(RunPipeline, FastModeIsSingleSolve) {
  RunConfig cfg = tpch_config();
  cfg.fast = true;
  const JoinGraphReport r = run_infer(cfg);
  ASSERT_EQ(r.trace.iterations.size(), 1u);
  EXPECT_EQ(r.trace.exit_reason, "fast_mode");
  EXPECT_EQ(r.config.em.gamma, 1);
  for (const auto& e : r.edges) EXPECT_NE(e.provenance, Provenance::PromotedByEm);
}

TEST(RunPipeline, FastModeIsFasterThanEm) {
  auto inst = joingraph::testing::make_suite_instance(joingraph::testing::kSuiteSeed, 20);
  RunConfig cfg;
  const JoinGraphReport em = run_pipeline(cfg, inst.inputs, &inst.oracle);
  cfg.fast = true;
  const JoinGraphReport fast = run_pipeline(cfg, inst.inputs, &inst.oracle);
  EXPECT_LT(fast.times.infer, em.times.infer);
}

TEST(RunPipeline, EmptySchema) {
  const JoinGraphReport r = run_pipeline(RunConfig{}, RunInputs{}, nullptr);
  EXPECT_TRUE(r.edges.empty());
  EXPECT_EQ(r.latent_pairs, 0u);
  EXPECT_EQ(r.trace.exit_reason, "no_candidates");
}

TEST(RunPipeline, ErrorsCarryStage) {
  auto inst = joingraph::testing::make_suite_instance(joingraph::testing::kSuiteSeed);
  EXPECT_EQ(stage_of([&] { run_pipeline(joingraph::testing::llm_prior_config(), inst.inputs, nullptr); }), "scoring");
  EXPECT_EQ(stage_of([&] { run_pipeline(RunConfig{}, inst.inputs, nullptr); }), "inference");
  RunConfig bad;
  bad.solver.theta = 1.5;
  EXPECT_EQ(stage_of([&] { run_pipeline(bad, inst.inputs, &inst.oracle); }), "configuration");
  RunConfig missing;
  missing.schema_path = "/nonexistent/schema.json";
  EXPECT_EQ(stage_of([&] { load_inputs(missing); }), "ingestion");
  RunConfig frac = tpch_config();
  frac.truth_path.reset();
  frac.known_fraction = 0.5;
  EXPECT_THROW(load_inputs(frac), RangeError);
}

TEST(RunPipeline, LlmPriorMatchesPredictions) {
  auto inst = joingraph::testing::make_suite_instance(joingraph::testing::kSuiteSeed + 1);
  RunConfig cfg = joingraph::testing::llm_prior_config();
  cfg.fast = true;
  const JoinGraphReport r = run_pipeline(cfg, inst.inputs, &inst.oracle);
  EXPECT_EQ(r.latent_pairs, inst.predictions.size());
  EXPECT_GT(inst.oracle.predict_requests(), 0u);
  ASSERT_TRUE(r.metrics.has_value());
  EXPECT_GT(r.metrics->f1, 0.0);
}

TEST(ReportJson, EdgesRoundTrip) {
  const JoinGraphReport r = run_infer(tpch_config());
  const std::string text = report_json(r);
  EXPECT_EQ(text.find("seconds"), std::string::npos);
  const ReportEdges parsed = parse_report_edges(text);
  EXPECT_EQ(parsed.index.size(), r.index.size());
  ASSERT_EQ(parsed.edges.size(), r.edges.size());
  for (std::size_t k = 0; k < r.edges.size(); ++k) {
    EXPECT_EQ(parsed.edges[k], make_pair_key(r.edges[k].i, r.edges[k].j));
  }
  EXPECT_NE(stats_json(r).find("seconds"), std::string::npos);
  EXPECT_THROW(parse_report_edges("[1, 2]"), FormatError);
  EXPECT_THROW(parse_report_edges("{"), FormatError);
}

TEST(Sweep, ExpandGrid) {
  SweepGrid grid;
  grid.lambda1 = {0.1, 0.5, 1.0, 2.0};
  grid.lambda2 = {0.0, 0.05, 0.1, 0.2, 0.5};
  RunConfig base;
  base.solver.theta = 0.4;
  const auto points = expand_grid(grid, base);
  ASSERT_EQ(points.size(), 20u);
  EXPECT_EQ(points[0].lambda1, 0.1);
  EXPECT_EQ(points[1].lambda2, 0.05);
  EXPECT_EQ(points[5].lambda1, 0.5);
  EXPECT_EQ(points[19].index, 19u);
  for (const auto& p : points) {
    EXPECT_EQ(p.theta, 0.4);
    EXPECT_EQ(p.high_threshold, base.em.high_threshold);
  }
  EXPECT_EQ(expand_grid(SweepGrid{}, base).size(), 1u);
}

TEST(Sweep, RowsInGridOrderAndIndependentOfWorkers) {
  auto inst = joingraph::testing::make_suite_instance(joingraph::testing::kSuiteSeed + 2);
  RunConfig base;
  base.fast = true;
  SweepGrid grid;
  grid.lambda1 = {0.1, 0.5, 1.0, 2.0};
  grid.lambda2 = {0.0, 0.05, 0.1, 0.2, 0.5};
  const auto one = run_sweep(base, grid, inst.inputs, &inst.oracle, 1);
  const auto many = run_sweep(base, grid, inst.inputs, &inst.oracle, 3);
  ASSERT_EQ(one.size(), 20u);
  EXPECT_EQ(sweep_csv(one), sweep_csv(many));
  for (std::size_t k = 0; k < one.size(); ++k) {
    EXPECT_EQ(one[k].point.index, k);
    EXPECT_TRUE(one[k].result.has_value()) << one[k].error;
  }
  const std::string csv = sweep_csv(one);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 21);
}

TEST(Sweep, ErrorsAreRecordedPerRow) {
  auto inst = joingraph::testing::make_suite_instance(joingraph::testing::kSuiteSeed + 3);
  RunConfig base;
  base.fast = true;
  SweepGrid grid;
  grid.theta = {0.5, 1.5};
  const auto rows = run_sweep(base, grid, inst.inputs, &inst.oracle, 1);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_TRUE(rows[0].result.has_value());
  EXPECT_FALSE(rows[1].result.has_value());
  EXPECT_FALSE(rows[1].error.empty());

  RunInputs no_truth = inst.inputs;
  no_truth.truth.reset();
  EXPECT_THROW(run_sweep(base, grid, no_truth, &inst.oracle), RangeError);
}

TEST(Sweep, KnownJoinsRaiseRecall) {
  auto inst = joingraph::testing::make_suite_instance(joingraph::testing::kSuiteSeed + 4);
  RunConfig base;
  base.fast = true;
  SweepGrid grid;
  grid.known_fraction = {0.0, 1.0};
  const auto rows = run_sweep(base, grid, inst.inputs, &inst.oracle, 1);
  ASSERT_TRUE(rows[1].result.has_value());
  EXPECT_EQ(rows[1].result->recall, 1.0);
}

TEST(SweepConfig, Parse) {
  const SweepFile f = parse_sweep_config(R"({"schema": "s.json", "truth": "/abs/t.json",
      "oracle": "mock:o.json", "fast": true, "seed": 4, "workers": 2,
      "grid": {"lambda1": [0.1, 1.0], "known_fraction": [0, 0.5]}})",
                                         "/cfg");
  EXPECT_EQ(f.base.schema_path, std::filesystem::path("/cfg/s.json"));
  EXPECT_EQ(f.base.truth_path, std::filesystem::path("/abs/t.json"));
  EXPECT_EQ(f.base.oracle.mock_fixture, std::filesystem::path("/cfg/o.json"));
  EXPECT_TRUE(f.base.fast);
  EXPECT_EQ(f.base.seed, 4u);
  EXPECT_EQ(f.workers, 2u);
  EXPECT_EQ(f.grid.lambda1, (std::vector<double>{0.1, 1.0}));
  EXPECT_EQ(f.grid.known_fraction, (std::vector<double>{0.0, 0.5}));

  EXPECT_THROW(parse_sweep_config(R"({"schema": "s.json"})"), FormatError);
  EXPECT_THROW(parse_sweep_config(R"({"schema": "s", "truth": "t", "grid": {"rho": [1]}})"), FormatError);
  EXPECT_THROW(parse_sweep_config(R"({"schema": "s", "truth": "t", "grid": {"theta": "x"}})"), FormatError);
  EXPECT_THROW(parse_sweep_config("not json"), FormatError);
}
