#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "joingraph/ingestion.hpp"
#include "joingraph/oracle.hpp"
#include "joingraph/schema.hpp"
#include "joingraph/scoring.hpp"

namespace joingraph {

// Platform-independent draws from mt19937_64 (the std distributions are
// implementation-defined).
double uniform01(std::mt19937_64& engine);
std::uint64_t uniform_int(std::mt19937_64& engine, std::uint64_t lo, std::uint64_t hi);

struct SyntheticOptions {
  int tables = 8;
  int min_attributes = 2;
  int max_attributes = 5;
  double extra_fk_probability = 0.4;  // chance of a second foreign key per table
  std::uint64_t min_rows = 1000;
  std::uint64_t max_rows = 1000000;
  double synonym_share = 0.3;  // foreign keys annotated with a synonym of the key type
  std::uint64_t seed = 0;
};

// A schema with primary keys, foreign keys and attribute columns whose
// statistics are mutually consistent, plus the entity types a truthful
// oracle would report.
struct SyntheticInstance {
  std::vector<ColumnMeta> columns;
  GroundTruth truth;
  std::map<std::string, std::string> entity_types;  // qualified name -> type
  std::vector<std::pair<std::string, std::string>> synonyms;
};

SyntheticInstance generate_schema(const SyntheticOptions& options);

MockOracle truthful_oracle(const SyntheticInstance& instance);

// {"annotations": ..., "synonyms": ...} as read by MockOracle::from_json.
std::string oracle_fixture_json(const SyntheticInstance& instance,
                                const std::map<PairKey, JoinPrediction>& predictions = {});

// Confidence is drawn separately for right and wrong answers; the rest are
// medium confidence. Equal shares give an uncalibrated scorer.
struct PriorNoise {
  double flip_probability = 0.3;
  double high_share_correct = 0.8;
  double high_share_wrong = 0.3;
  std::uint64_t seed = 0;
};

// Per-candidate predictions of an LLM-like scorer: the true label flipped
// with flip_probability, high or medium confidence.
std::map<PairKey, JoinPrediction> noisy_predictions(const GroundTruth& truth,
                                                    std::span<const CandidatePair> candidates,
                                                    const PriorNoise& noise);

ScoreMap prediction_scores(const std::map<PairKey, JoinPrediction>& predictions,
                           const ConfidenceMapping& mapping = {});

struct PlantedInstance {
  JoinGraphMatrix a;
  ProbabilityMatrix s;
};

// Complete bipartite graph between columns [0, left) and [left, left+right)
// on n columns. A random observed_fraction of the off-diagonal pairs is
// observed; every entry of S equals A.
PlantedInstance planted_biclique(ColumnId n, ColumnId left, ColumnId right, double observed_fraction,
                                 std::uint64_t seed);

// Symmetric S with zero diagonal and a random observed set. Latent entries
// are uniform on [0,1]; observed ones are 1 with probability 0.3, else 0.
ProbabilityMatrix random_completion_instance(ColumnId n, double observed_fraction, std::uint64_t seed);

}  // namespace joingraph
