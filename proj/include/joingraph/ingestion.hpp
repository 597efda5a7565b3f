#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "joingraph/schema.hpp"

namespace joingraph {

// A confirmed join between two resolved columns; left < right after loading.
struct QueryLogJoin {
  ColumnId left = 0;
  ColumnId right = 0;

  friend auto operator<=>(const QueryLogJoin&, const QueryLogJoin&) = default;
};

// Undirected ground-truth edge set, stored as sorted unique (i < j) pairs.
struct GroundTruth {
  std::vector<PairKey> edges;

  JoinGraphMatrix to_matrix(ColumnId n) const;
  bool contains(ColumnId a, ColumnId b) const;
};

struct QueryLogLoad {
  std::vector<QueryLogJoin> joins;
  std::size_t skipped = 0;
  std::vector<std::string> warnings;
};

struct GroundTruthLoad {
  GroundTruth truth;
  std::size_t skipped = 0;
  std::vector<std::string> warnings;
};

// Schema metadata document:
//   {"tables": [{"name": str, "columns": [{"name", "type", "row_count",
//     "distinct_count", "null_count", "min", "max"}]}]}
// Statistics may be null or omitted; they load as absent values.
std::vector<ColumnMeta> parse_schema_json(std::string_view text);
std::vector<ColumnMeta> load_schema_file(const std::filesystem::path& path);

// Serializes back to the schema document; tables appear in first-seen order.
std::string write_schema_json(const std::vector<ColumnMeta>& columns);

// Edge lists: [{"left": "table.column", "right": "table.column"}, ...].
QueryLogLoad parse_query_log_json(std::string_view text, const ColumnIndex& index);
QueryLogLoad load_query_log(const std::filesystem::path& path, const ColumnIndex& index);

GroundTruthLoad parse_ground_truth_json(std::string_view text, const ColumnIndex& index);
GroundTruthLoad load_ground_truth(const std::filesystem::path& path, const ColumnIndex& index);

std::string write_edge_list_json(const std::vector<PairKey>& edges, const ColumnIndex& index);

// Seeded shuffle followed by a prefix take, so fractions f1 < f2 under one
// seed give nested samples. |result| = round(fraction * |truth|).
std::vector<QueryLogJoin> sample_known_joins(const GroundTruth& truth, double fraction,
                                             std::uint64_t seed);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace joingraph
