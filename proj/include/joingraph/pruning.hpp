#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "joingraph/ingestion.hpp"
#include "joingraph/schema.hpp"

namespace joingraph {

struct PruneReport {
  std::size_t columns_total = 0;
  std::size_t columns_dropped_by_type = 0;
  std::size_t pairs_enumerated = 0;  // over eligible columns
  std::size_t dropped_same_table = 0;
  std::size_t dropped_type = 0;
  std::size_t dropped_uniqueness = 0;
  std::size_t dropped_cardinality = 0;
  std::size_t dropped_domain = 0;
  std::vector<CandidatePair> survivors;  // i < j, row-major order

  std::size_t pairs_dropped() const {
    return dropped_same_table + dropped_type + dropped_uniqueness + dropped_cardinality +
           dropped_domain;
  }
};

// Join-compatibility class of a type, or -1 if the type never joins.
// {INTEGER, BIGINT}, {VARCHAR}, {DATE, TIMESTAMP}.
int join_class(DataType type);

// Indices of columns whose type can carry a join key. Nested, measure,
// BLOB, BOOLEAN and unrecognised types are excluded.
std::vector<ColumnId> filter_joinable_columns(std::span<const ColumnMeta> columns);

enum class Uniqueness { Unique, NotUnique, Unknown };

// unique <=> distinct_count == row_count - null_count; empty columns are
// never unique. Missing statistics give Unknown.
Uniqueness uniqueness(const ColumnMeta& column);

// Applies the type, uniqueness, cardinality and domain-containment rules to
// every cross-table pair of eligible columns.
PruneReport prune_pairs(std::span<const ColumnMeta> columns, std::span<const ColumnId> eligible);

// S skeleton: ones at known joins, zeros elsewhere; every position except the
// surviving candidates is observed.
ProbabilityMatrix build_initial_mask(ColumnId n, std::span<const CandidatePair> survivors,
                                     std::span<const QueryLogJoin> known);

}  // namespace joingraph
