#pragma once

#include <optional>
#include <string>

#include "joingraph/schema.hpp"

namespace joingraph::testing {

inline ColumnMeta column(std::string table, std::string name, DataType type,
                         std::optional<std::uint64_t> rows = std::nullopt,
                         std::optional<std::uint64_t> distinct = std::nullopt,
                         std::optional<std::uint64_t> nulls = std::nullopt,
                         std::optional<std::string> min = std::nullopt,
                         std::optional<std::string> max = std::nullopt) {
  ColumnMeta c;
  c.table_name = std::move(table);
  c.column_name = std::move(name);
  c.type = type;
  c.row_count = rows;
  c.distinct_count = distinct;
  c.null_count = nulls;
  c.min_value = std::move(min);
  c.max_value = std::move(max);
  return c;
}

inline std::string data_path(const std::string& relative) {
  return std::string(JOINGRAPH_DATA_DIR) + "/" + relative;
}

}  // namespace joingraph::testing
