#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "joingraph/em.hpp"
#include "joingraph/evaluation.hpp"
#include "joingraph/ingestion.hpp"
#include "joingraph/lrmc.hpp"
#include "joingraph/oracle.hpp"
#include "joingraph/pruning.hpp"
#include "joingraph/schema.hpp"
#include "joingraph/scoring.hpp"

namespace joingraph {

struct OracleSelection {
  enum class Kind { None, Mock, Http };
  Kind kind = Kind::None;
  std::filesystem::path mock_fixture;
  std::string url;
  std::filesystem::path prompt_template;
};

// "mock:<path>" or "http". Throws RangeError on anything else.
OracleSelection parse_oracle_selection(const std::string& text);

// "heuristic", "score-file:<path>" or "llm".
struct PriorSelection {
  ScorerKind kind = ScorerKind::Heuristic;
  std::filesystem::path score_file;
};
PriorSelection parse_prior_selection(const std::string& text);

struct RunConfig {
  std::filesystem::path schema_path;
  std::optional<std::filesystem::path> query_log_path;
  std::optional<std::filesystem::path> truth_path;
  PriorSelection prior;
  OracleSelection oracle;
  SolverConfig solver;
  EmConfig em;
  LlmScoringOptions llm;
  bool fast = false;
  std::uint64_t seed = 0;
  // Fraction of the truth edges fed in as known joins (needs truth_path).
  std::optional<double> known_fraction;

  // Fast mode forces a single E-step on the core submatrix.
  RunConfig normalized() const;
};

// Everything run_infer reads from disk, already parsed.
struct RunInputs {
  std::vector<ColumnMeta> columns;
  std::vector<QueryLogJoin> known;
  std::optional<GroundTruth> truth;
  std::optional<std::string> score_file_text;  // for ScorerKind::ScoreFile
  std::vector<std::string> warnings;
};

RunInputs load_inputs(const RunConfig& cfg);

enum class Provenance { QueryLog, PromotedByEm, Completion };
std::string_view to_string(Provenance p);

struct ReportEdge {
  ColumnId i = 0;
  ColumnId j = 0;
  Provenance provenance = Provenance::Completion;
  double value = 0.0;  // entry of the completed matrix
};

struct StageTimes {
  double ingest = 0.0;
  double prune = 0.0;
  double score = 0.0;
  double infer = 0.0;
  double total = 0.0;
};

struct JoinGraphReport {
  RunConfig config;
  ColumnIndex index;
  PruneReport prune;
  std::size_t latent_pairs = 0;
  std::vector<ReportEdge> edges;  // i < j, ascending
  JoinGraphMatrix decisions;
  LatentMatrix m;
  EmTrace trace;
  std::optional<EvalResult> metrics;
  std::vector<std::string> warnings;
  StageTimes times;
};

// Pruning, scoring, completion (one solve on the core submatrix in fast
// mode, EM otherwise) and thresholding. `oracle` may be null unless the
// prior or EM needs it.
JoinGraphReport run_pipeline(const RunConfig& cfg, const RunInputs& inputs, SemanticOracle* oracle);

std::unique_ptr<SemanticOracle> make_oracle(const OracleSelection& selection);

// Loads inputs and the configured oracle, then runs the pipeline.
JoinGraphReport run_infer(const RunConfig& cfg);

// Byte-stable JSON: no timings, fixed key order.
std::string report_json(const JoinGraphReport& report);
// Timings, solver diagnostics and per-iteration EM statistics.
std::string stats_json(const JoinGraphReport& report);
std::string prune_report_json(const PruneReport& prune);

// Positive edges of a report document, resolved against its column list.
struct ReportEdges {
  ColumnIndex index;
  std::vector<PairKey> edges;
};
ReportEdges parse_report_edges(std::string_view text);

struct SweepGrid {
  std::vector<double> lambda1;
  std::vector<double> lambda2;
  std::vector<double> theta;
  std::vector<double> high_threshold;
  std::vector<double> known_fraction;
};

struct SweepPoint {
  std::size_t index = 0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double theta = 0.0;
  double high_threshold = 0.0;
  double known_fraction = 0.0;
};

// Cartesian product, lambda1 outermost and known_fraction innermost.
// Empty axes take the value of `base`.
std::vector<SweepPoint> expand_grid(const SweepGrid& grid, const RunConfig& base);

struct SweepRow {
  SweepPoint point;
  std::optional<EvalResult> result;
  std::string error;
};

// Runs every grid point against the same inputs (truth required). Known
// joins of a point are the inputs' known joins plus a seeded sample of the
// truth. Rows come back in grid order; a failing point records its error.
std::vector<SweepRow> run_sweep(const RunConfig& base, const SweepGrid& grid, const RunInputs& inputs,
                                SemanticOracle* oracle, std::size_t workers = 0);

std::string sweep_csv(const std::vector<SweepRow>& rows);

struct SweepFile {
  RunConfig base;
  SweepGrid grid;
  std::size_t workers = 0;
};
// {"schema", "truth", "query_log"?, "prior"?, "oracle"?, "fast"?, "seed"?,
//  "workers"?, "grid": {"lambda1": [..], ...}}; relative paths resolve
// against the config file's directory.
SweepFile parse_sweep_config(std::string_view text, const std::filesystem::path& base_dir = {});

}  // namespace joingraph
