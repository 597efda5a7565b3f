#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "joingraph/oracle.hpp"
#include "joingraph/schema.hpp"

namespace joingraph {

// Name-derived and column-wise features of one candidate pair.
struct PairFeatures {
  double name_containment = 0.0;
  double name_jaccard = 0.0;
  double edit_distance_ratio = 0.0;
  double jaro_winkler = 0.0;
  double embedding_cosine = 0.0;
  bool type_match = false;
  double cardinality_ratio = 1.0;
  double null_ratio_i = 0.0;
  double null_ratio_j = 0.0;
};

enum class ScorerKind { Heuristic, ScoreFile, Llm };

// Lowercase identifier tokens; splits on non-alphanumerics and camel-case
// boundaries ("orderID_2" -> {"order", "id", "2"}).
std::vector<std::string> name_tokens(std::string_view name);

std::size_t levenshtein(std::string_view a, std::string_view b);
double jaro(std::string_view a, std::string_view b);
// Standard Jaro-Winkler with prefix scale 0.1 and prefix length capped at 4.
double jaro_winkler(std::string_view a, std::string_view b);

constexpr int kEmbeddingDim = 256;

// Character 3-gram hashing embedding of the lowercased name, l2-normalised.
Eigen::VectorXd name_embedding(std::string_view name);

// Features over two name strings alone.
PairFeatures name_features(std::string_view a, std::string_view b);

// Name features over "table.column" plus type and statistics features.
PairFeatures compute_pair_features(const ColumnMeta& a, const ColumnMeta& b);

struct HeuristicWeights {
  double name = 0.5;
  double jaro_winkler = 0.3;
  double embedding = 0.2;
};

// clip(w_name * max(containment, jaccard) + w_jw * jaro_winkler
//      + w_emb * max(cosine, 0), 0, 1)
double heuristic_score(const PairFeatures& f, const HeuristicWeights& weights = {});

using ScoreMap = std::map<PairKey, double>;

ScoreMap heuristic_scores(std::span<const ColumnMeta> columns,
                          std::span<const CandidatePair> candidates,
                          const HeuristicWeights& weights = {});

constexpr double kDefaultFileScore = 0.5;

struct ScoreFileLoad {
  ScoreMap scores;
  std::size_t defaulted = 0;
  std::vector<std::string> warnings;
};

// Score file: {"table.column|table.column": score, ...}. Candidates absent
// from the file get kDefaultFileScore; keys that are not candidates are
// ignored with a warning.
ScoreFileLoad parse_score_file_json(std::string_view text, const ColumnIndex& index,
                                    std::span<const CandidatePair> candidates);
ScoreFileLoad load_score_file(const std::filesystem::path& path, const ColumnIndex& index,
                              std::span<const CandidatePair> candidates);

// Canonical score-file key for a pair (endpoints in lexicographic order).
std::string score_key(const ColumnIndex& index, ColumnId a, ColumnId b);

struct ConfidenceMapping {
  double low = 0.1;
  double medium = 0.6;
  double high = 0.9;

  double probability(ConfidenceLevel level) const;
  // Positive predictions map to the level's probability, negative ones to
  // its complement.
  double score(const JoinPrediction& prediction) const;
};

struct LlmScoringOptions {
  std::size_t batch_size = 24;
  std::size_t max_in_flight = 4;
  ConfidenceMapping mapping;
};

struct LlmScore {
  JoinPrediction prediction;
  double score = 0.0;
};

// Asks the oracle for a prediction and confidence level per candidate.
// Throws OracleError (naming the batch) if any batch fails.
std::map<PairKey, LlmScore> llm_score_batch(std::span<const CandidatePair> candidates,
                                            const ColumnIndex& index, SemanticOracle& oracle,
                                            const LlmScoringOptions& options = {});

ScoreMap to_score_map(const std::map<PairKey, LlmScore>& scores);

// Writes scores into the latent positions of the skeleton. Every latent
// position must be scored; scoring an observed position is a MaskViolation.
ProbabilityMatrix fill_probability_matrix(const ProbabilityMatrix& skeleton, const ScoreMap& scores);

}  // namespace joingraph
