#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "joingraph/errors.hpp"

namespace joingraph {

struct ColumnContext {
  std::string table;
  std::string column;
};

struct TypedColumn {
  std::string table;
  std::string column;
  std::string entity_type;
};

struct TypeMatchQuery {
  TypedColumn a;
  TypedColumn b;
};

struct PairQuery {
  ColumnContext a;
  ColumnContext b;
};

enum class ConfidenceLevel { Low, Medium, High };

std::string_view to_string(ConfidenceLevel level);
std::optional<ConfidenceLevel> parse_confidence(std::string_view text);

struct JoinPrediction {
  bool joinable = false;
  ConfidenceLevel level = ConfidenceLevel::Low;

  friend bool operator==(const JoinPrediction&, const JoinPrediction&) = default;
};

// Semantic services backing the refinement loop and the LLM prior. Every
// call answers one batch and returns one result per input, in order.
// Implementations throw OracleError when a batch cannot be answered and must
// tolerate concurrent calls.
class SemanticOracle {
 public:
  virtual ~SemanticOracle() = default;

  virtual std::vector<std::string> annotate(std::span<const ColumnContext> columns) = 0;
  virtual std::vector<bool> soft_match(std::span<const TypeMatchQuery> pairs) = 0;
  virtual std::vector<JoinPrediction> predict_joins(std::span<const PairQuery> pairs) = 0;
};

// Lowercase, trim and collapse internal whitespace.
std::string normalize_entity_type(std::string_view text);

// Deterministic in-process oracle driven by a fixture:
//   {"annotations": {"table.column": "entity type", ...},
//    "synonyms": [["client id", "customer id"], ...],
//    "predictions": {"a.x|b.y": {"joinable": true, "confidence": "high"}}}
// Unlisted columns annotate to the empty string. Pairs without an explicit
// prediction are predicted joinable (high confidence) iff their annotations
// agree.
class MockOracle : public SemanticOracle {
 public:
  MockOracle() = default;
  MockOracle(std::map<std::string, std::string> annotations,
             std::vector<std::pair<std::string, std::string>> synonyms = {});

  static MockOracle from_json(std::string_view text);
  static MockOracle from_file(const std::filesystem::path& path);

  void set_annotation(const std::string& qualified, std::string entity_type);
  void add_synonym(const std::string& a, const std::string& b);
  void set_prediction(const std::string& a, const std::string& b, JoinPrediction prediction);
  // Every subsequent call throws OracleError.
  void set_unavailable(bool unavailable) { unavailable_ = unavailable; }

  std::vector<std::string> annotate(std::span<const ColumnContext> columns) override;
  std::vector<bool> soft_match(std::span<const TypeMatchQuery> pairs) override;
  std::vector<JoinPrediction> predict_joins(std::span<const PairQuery> pairs) override;

  std::size_t annotate_requests() const { return counters_->annotate_requests; }
  std::size_t annotated_columns() const { return counters_->annotated_columns; }
  std::size_t match_requests() const { return counters_->match_requests; }
  std::size_t matched_pairs() const { return counters_->matched_pairs; }
  std::size_t predict_requests() const { return counters_->predict_requests; }
  void reset_counters();

 private:
  bool synonymous(const std::string& a, const std::string& b) const;

  std::map<std::string, std::string> annotations_;
  std::set<std::pair<std::string, std::string>> synonyms_;
  std::map<std::pair<std::string, std::string>, JoinPrediction> predictions_;
  struct Counters {
    std::atomic<std::size_t> annotate_requests{0};
    std::atomic<std::size_t> annotated_columns{0};
    std::atomic<std::size_t> match_requests{0};
    std::atomic<std::size_t> matched_pairs{0};
    std::atomic<std::size_t> predict_requests{0};
  };

  bool unavailable_ = false;
  std::unique_ptr<Counters> counters_ = std::make_unique<Counters>();
};

// Client for a remote oracle service:
//   POST /annotate {"columns": [{"table", "column"}]} -> {"entity_types": [str]}
//   POST /match    {"pairs": [{"a": {"table", "column", "entity_type"}, "b": {...}}]}
//                  -> {"matches": [bool]}
//   POST /predict  {"pairs": [{"a": {"table", "column"}, "b": {...}}]}
//                  -> {"predictions": [{"joinable": bool, "confidence": str}]}
// When a prompt template is configured, each request also carries a
// "prompt" field rendered from it ({{task}}, {{items}} placeholders).
class HttpOracle : public SemanticOracle {
 public:
  struct Options {
    std::string url;
    std::string bearer_token;
    std::string prompt_template;
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{200};
    std::chrono::seconds timeout{60};
  };

  explicit HttpOracle(Options options);

  // Token from JOINGRAPH_ORACLE_TOKEN when set.
  static HttpOracle from_environment(std::string url, std::string prompt_template = {});

  std::vector<std::string> annotate(std::span<const ColumnContext> columns) override;
  std::vector<bool> soft_match(std::span<const TypeMatchQuery> pairs) override;
  std::vector<JoinPrediction> predict_joins(std::span<const PairQuery> pairs) override;

  // Exposed for tests of the template renderer.
  static std::string render_prompt(const std::string& tmpl, std::string_view task,
                                   std::string_view items);

 private:
  std::string post(const std::string& endpoint, const std::string& body) const;

  Options options_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

// Splits `total` items into consecutive batches and runs `fn(first, count)`
// on each with at most `max_in_flight` batches outstanding. Results come back
// in batch order; a batch whose call threw OracleError yields nullopt and its
// message is appended to `failures`.
template <typename Fn>
auto run_batches(std::size_t total, std::size_t batch_size, std::size_t max_in_flight, Fn fn,
                 std::vector<std::string>* failures = nullptr)
    -> std::vector<std::optional<decltype(fn(std::size_t{}, std::size_t{}))>> {
  using Result = decltype(fn(std::size_t{}, std::size_t{}));
  if (batch_size == 0) throw RangeError("oracle batch size must be positive");
  if (max_in_flight == 0) max_in_flight = 1;
  const std::size_t batches = (total + batch_size - 1) / batch_size;
  std::vector<std::optional<Result>> results(batches);
  const auto record = [&](std::size_t b, auto&& call) {
    try {
      results[b] = call();
    } catch (const OracleError& e) {
      if (failures) failures->push_back("batch " + std::to_string(b) + ": " + e.what());
    }
  };
  for (std::size_t window = 0; window < batches; window += max_in_flight) {
    const std::size_t end = std::min(batches, window + max_in_flight);
    if (end - window == 1) {
      const std::size_t first = window * batch_size;
      record(window, [&] { return fn(first, std::min(batch_size, total - first)); });
      continue;
    }
    std::vector<std::future<Result>> inflight;
    for (std::size_t b = window; b < end; ++b) {
      const std::size_t first = b * batch_size;
      const std::size_t count = std::min(batch_size, total - first);
      inflight.push_back(std::async(std::launch::async, [&fn, first, count] { return fn(first, count); }));
    }
    for (std::size_t b = window; b < end; ++b) {
      record(b, [&] { return inflight[b - window].get(); });
    }
  }
  return results;
}

}  // namespace joingraph
