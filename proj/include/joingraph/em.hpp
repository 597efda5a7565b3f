#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "joingraph/lrmc.hpp"
#include "joingraph/oracle.hpp"
#include "joingraph/schema.hpp"

namespace joingraph {

struct EmConfig {
  int gamma = 5;          // maximum E-steps
  double epsilon = 1e-5;  // Frobenius tolerance between consecutive solves
  double low_threshold = 0.5;
  double high_threshold = 0.8;
  double delta = 0.5;  // decay factor for type mismatches
  std::size_t oracle_batch_size = 24;
  std::size_t max_in_flight = 4;

  void validate() const;
};

// Sentinel entity type for columns whose annotation came back empty.
inline constexpr const char* kUnknownEntityType = "unknown";

// Column entity types and soft-match verdicts collected during one run.
// Entries are write-once.
class EntityTypeCache {
 public:
  bool contains(ColumnId column) const { return types_.contains(column); }
  const std::string* find(ColumnId column) const;
  // Returns false (and leaves the entry alone) if the column is already cached.
  bool insert(ColumnId column, std::string entity_type);

  std::optional<bool> find_match(const std::string& a, const std::string& b) const;
  bool insert_match(const std::string& a, const std::string& b, bool matches);

  std::size_t size() const noexcept { return types_.size(); }
  const std::map<ColumnId, std::string>& types() const noexcept { return types_; }

 private:
  std::map<ColumnId, std::string> types_;
  std::map<std::pair<std::string, std::string>, bool> matches_;
};

struct MStepStats {
  std::size_t candidates = 0;  // latent pairs at or above low_threshold
  std::size_t promoted = 0;
  std::size_t boosted = 0;
  std::size_t decayed = 0;
  std::size_t untouched_on_failure = 0;
  std::size_t annotate_requests = 0;
  std::size_t match_requests = 0;
  std::vector<std::string> failures;
  // Every oracle request of this step failed.
  bool oracle_unreachable = false;
};

struct MStepResult {
  ProbabilityMatrix s;
  MStepStats stats;
};

// Annotates the columns not yet in the cache, in batches.
MStepStats annotate_entity_types(std::span<const ColumnId> columns, const ColumnIndex& index,
                                 SemanticOracle& oracle, EntityTypeCache& cache, const EmConfig& cfg);

// Character-wise comparison after normalisation; falls back to the oracle's
// soft match (and caches the verdict). nullopt when the oracle failed.
std::optional<bool> soft_type_match(const TypedColumn& a, const TypedColumn& b, SemanticOracle& oracle,
                                    EntityTypeCache& cache);

// One M-step: refines the latent probabilities of `m` using entity-type
// compatibility. Compatible pairs at or above high_threshold are promoted to
// certain ones, compatible pairs below it are raised to high_threshold, and
// incompatible pairs are multiplied by delta. Pairs below low_threshold are
// not examined.
MStepResult update_prob_matrix(const LatentMatrix& m, const ProbabilityMatrix& s, EntityTypeCache& cache,
                               const EmConfig& cfg, SemanticOracle& oracle, const ColumnIndex& index);

struct EmIteration {
  int t = 0;
  std::optional<double> frobenius_delta;  // ||M(t+1) - M(t)||_F, absent at t = 0
  Eigen::Index latent_before = 0;         // |latent set| fed to the E-step
  SolveStats solve;
  std::optional<MStepStats> m_step;
};

struct EmTrace {
  std::vector<EmIteration> iterations;
  std::string exit_reason;
  bool degraded = false;
};

struct EmResult {
  LatentMatrix m;
  ProbabilityMatrix s;  // probability matrix and mask of the final E-step
  EntityTypeCache cache;
  EmTrace trace;
};

// Alternates completion (E-step) and update_prob_matrix (M-step) for at most
// cfg.gamma E-steps. If every oracle request of an M-step fails, the loop
// stops with the last E-step result and trace.degraded set.
EmResult em_infer(const ProbabilityMatrix& s0, const EmConfig& cfg, const SolverConfig& solver_cfg,
                  SemanticOracle& oracle, const ColumnIndex& index);

}  // namespace joingraph
