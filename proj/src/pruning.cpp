#include "joingraph/pruning.hpp"

#include <algorithm>
#include <string>

namespace joingraph {

namespace {

enum class Stage { Uniqueness = 0, Cardinality = 1, Domain = 2, Pass = 3 };

DataType comparison_type(DataType a, DataType b) {
  if (is_temporal(a) && is_temporal(b)) {
    return (a == DataType::Timestamp || b == DataType::Timestamp) ? DataType::Timestamp
                                                                  : DataType::Date;
  }
  if (a == DataType::BigInt || b == DataType::BigInt) return DataType::BigInt;
  return a;
}

// Checks rules (c) and (d) with `one` as the unique side. Rule (b) is
// checked by the caller.
Stage check_orientation(const ColumnMeta& one, const ColumnMeta& many) {
  if (one.distinct_count && many.distinct_count && *many.distinct_count > *one.distinct_count) {
    return Stage::Cardinality;
  }
  if (one.min_value && one.max_value && many.min_value && many.max_value) {
    const DataType type = comparison_type(one.type, many.type);
    const auto lower = compare_values(type, *one.min_value, *many.min_value);
    const auto upper = compare_values(type, *many.max_value, *one.max_value);
    if ((lower && *lower > 0) || (upper && *upper > 0)) return Stage::Domain;
  }
  return Stage::Pass;
}

}  // namespace

int join_class(DataType type) {
  switch (type) {
    case DataType::Integer:
    case DataType::BigInt:
      return 0;
    case DataType::Varchar:
      return 1;
    case DataType::Date:
    case DataType::Timestamp:
      return 2;
    default:
      return -1;
  }
}

std::vector<ColumnId> filter_joinable_columns(std::span<const ColumnMeta> columns) {
  std::vector<ColumnId> eligible;
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (join_class(columns[k].type) >= 0) eligible.push_back(static_cast<ColumnId>(k));
  }
  return eligible;
}

Uniqueness uniqueness(const ColumnMeta& column) {
  if (!column.row_count || !column.distinct_count) return Uniqueness::Unknown;
  if (*column.row_count == 0) return Uniqueness::NotUnique;
  if (!column.null_count) {
    return *column.distinct_count == *column.row_count ? Uniqueness::Unique : Uniqueness::Unknown;
  }
  return *column.distinct_count == *column.row_count - *column.null_count ? Uniqueness::Unique
                                                                          : Uniqueness::NotUnique;
}

PruneReport prune_pairs(std::span<const ColumnMeta> columns, std::span<const ColumnId> eligible) {
  PruneReport report;
  report.columns_total = columns.size();
  report.columns_dropped_by_type = columns.size() - eligible.size();

  std::vector<ColumnId> order(eligible.begin(), eligible.end());
  std::sort(order.begin(), order.end());
  for (ColumnId id : order) {
    if (id < 0 || static_cast<std::size_t>(id) >= columns.size()) {
      throw RangeError("eligible column index " + std::to_string(id) + " out of range");
    }
  }

  for (std::size_t a = 0; a < order.size(); ++a) {
    const ColumnId i = order[a];
    const ColumnMeta& ci = columns[static_cast<std::size_t>(i)];
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      const ColumnId j = order[b];
      const ColumnMeta& cj = columns[static_cast<std::size_t>(j)];
      ++report.pairs_enumerated;

      if (ci.table_name == cj.table_name) {
        ++report.dropped_same_table;
        continue;
      }
      if (join_class(ci.type) != join_class(cj.type)) {
        ++report.dropped_type;
        continue;
      }

      const Uniqueness ui = uniqueness(ci);
      const Uniqueness uj = uniqueness(cj);
      // j as the "1" side (i is N), then i as the "1" side.
      const bool j_can_be_one = uj != Uniqueness::NotUnique;
      const bool i_can_be_one = ui != Uniqueness::NotUnique;
      const Stage ij = j_can_be_one ? check_orientation(cj, ci) : Stage::Uniqueness;
      const Stage ji = i_can_be_one ? check_orientation(ci, cj) : Stage::Uniqueness;

      const Stage best = std::max(ij, ji);
      if (best != Stage::Pass) {
        switch (best) {
          case Stage::Uniqueness: ++report.dropped_uniqueness; break;
          case Stage::Cardinality: ++report.dropped_cardinality; break;
          default: ++report.dropped_domain; break;
        }
        continue;
      }

      JoinDirection direction = JoinDirection::Unknown;
      if (ij == Stage::Pass && ji == Stage::Pass) {
        if (ui == Uniqueness::Unique && uj == Uniqueness::Unique) direction = JoinDirection::OneToOne;
      } else if (ij == Stage::Pass) {
        direction = JoinDirection::NToOneIJ;
      } else {
        direction = JoinDirection::NToOneJI;
      }
      report.survivors.push_back({i, j, direction});
    }
  }
  return report;
}

ProbabilityMatrix build_initial_mask(ColumnId n, std::span<const CandidatePair> survivors,
                                     std::span<const QueryLogJoin> known) {
  ProbabilityMatrix s{Matrix::Zero(n, n), ObservedMask(n)};
  BoolArray observed = BoolArray::Constant(n, n, true);
  const auto check = [n](ColumnId a, ColumnId b, const char* what) {
    if (a < 0 || b < 0 || a >= n || b >= n) {
      throw InvalidEdge(std::string(what) + " index out of range");
    }
    if (a == b) {
      throw InvalidEdge(std::string(what) + " on diagonal entry " + std::to_string(a));
    }
  };
  for (const auto& pair : survivors) {
    check(pair.i, pair.j, "candidate");
    observed(pair.i, pair.j) = false;
    observed(pair.j, pair.i) = false;
  }
  for (const auto& join : known) {
    check(join.left, join.right, "known join");
    observed(join.left, join.right) = true;
    observed(join.right, join.left) = true;
    s.values(join.left, join.right) = 1.0;
    s.values(join.right, join.left) = 1.0;
  }
  for (ColumnId i = 0; i < n; ++i) {
    for (ColumnId j = i + 1; j < n; ++j) {
      if (observed(i, j)) s.mask.observe(i, j);
    }
  }
  return s;
}

}  // namespace joingraph
