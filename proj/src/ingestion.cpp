#include "joingraph/ingestion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace joingraph {

namespace {

using nlohmann::json;

json parse_document(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a 1-based line and column offset.
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    std::size_t line = 1;
    std::size_t line_start = 0;
    for (std::size_t k = 0; k + 1 < byte; ++k) {
      if (text[k] == '\n') {
        ++line;
        line_start = k + 1;
      }
    }
    throw FormatError(std::string("malformed JSON: ") + e.what(), line,
                      byte > line_start ? byte - line_start : 0);
  }
}

std::optional<std::uint64_t> optional_count(const json& record, const char* key,
                                            const std::string& where) {
  auto it = record.find(key);
  if (it == record.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer() || it->get<std::int64_t>() < 0) {
    throw FormatError(where + ": \"" + key + "\" must be a non-negative integer");
  }
  return it->get<std::uint64_t>();
}

std::optional<std::string> optional_scalar(const json& record, const char* key,
                                           const std::string& where) {
  auto it = record.find(key);
  if (it == record.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
  if (it->is_number()) {
    std::ostringstream out;
    out.precision(17);
    out << it->get<double>();
    return out.str();
  }
  throw FormatError(where + ": \"" + key + "\" must be a string, number or null");
}

const std::string& require_string(const json& record, const char* key, const std::string& where) {
  auto it = record.find(key);
  if (it == record.end() || !it->is_string()) {
    throw FormatError(where + ": missing string field \"" + key + "\"");
  }
  return it->get_ref<const std::string&>();
}

struct RawEdge {
  std::string left;
  std::string right;
};

std::vector<RawEdge> parse_edge_list(std::string_view text) {
  const json doc = parse_document(text);
  if (!doc.is_array()) throw FormatError("edge list must be a JSON array");
  std::vector<RawEdge> edges;
  edges.reserve(doc.size());
  for (std::size_t k = 0; k < doc.size(); ++k) {
    const std::string where = "edge " + std::to_string(k);
    if (!doc[k].is_object()) throw FormatError(where + ": expected an object");
    edges.push_back({require_string(doc[k], "left", where), require_string(doc[k], "right", where)});
  }
  return edges;
}

void skip(std::size_t& skipped, std::vector<std::string>& warnings, std::string message) {
  ++skipped;
  warnings.push_back(std::move(message));
}

}  // namespace

JoinGraphMatrix GroundTruth::to_matrix(ColumnId n) const {
  JoinGraphMatrix a{Matrix::Zero(n, n)};
  for (const auto& [i, j] : edges) {
    a.adjacency(i, j) = 1.0;
    a.adjacency(j, i) = 1.0;
  }
  return a;
}

bool GroundTruth::contains(ColumnId a, ColumnId b) const {
  return std::binary_search(edges.begin(), edges.end(), make_pair_key(a, b));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<ColumnMeta> parse_schema_json(std::string_view text) {
  const json doc = parse_document(text);
  if (!doc.is_object() || !doc.contains("tables") || !doc["tables"].is_array()) {
    throw FormatError("schema document must be an object with a \"tables\" array");
  }
  std::vector<ColumnMeta> columns;
  for (const auto& table : doc["tables"]) {
    if (!table.is_object()) throw FormatError("table entry must be an object");
    const std::string& table_name = require_string(table, "name", "table");
    auto cols = table.find("columns");
    if (cols == table.end() || !cols->is_array()) {
      throw FormatError("table " + table_name + ": missing \"columns\" array");
    }
    for (const auto& record : *cols) {
      if (!record.is_object()) throw FormatError("table " + table_name + ": column must be an object");
      ColumnMeta column;
      column.table_name = table_name;
      column.column_name = require_string(record, "name", "table " + table_name);
      const std::string where = column.qualified_name();
      column.type = parse_data_type(require_string(record, "type", where));
      column.row_count = optional_count(record, "row_count", where);
      column.distinct_count = optional_count(record, "distinct_count", where);
      column.null_count = optional_count(record, "null_count", where);
      column.min_value = optional_scalar(record, "min", where);
      column.max_value = optional_scalar(record, "max", where);
      validate(column);
      columns.push_back(std::move(column));
    }
  }
  return columns;
}

std::vector<ColumnMeta> load_schema_file(const std::filesystem::path& path) {
  return parse_schema_json(read_text_file(path));
}

std::string write_schema_json(const std::vector<ColumnMeta>& columns) {
  nlohmann::ordered_json doc;
  doc["tables"] = nlohmann::ordered_json::array();
  std::map<std::string, std::size_t> table_slot;
  for (const auto& column : columns) {
    auto [it, inserted] = table_slot.emplace(column.table_name, doc["tables"].size());
    if (inserted) {
      doc["tables"].push_back({{"name", column.table_name}, {"columns", nlohmann::ordered_json::array()}});
    }
    nlohmann::ordered_json record;
    record["name"] = column.column_name;
    record["type"] = std::string(to_string(column.type));
    const auto count = [](const std::optional<std::uint64_t>& v) {
      return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    };
    const auto scalar = [](const std::optional<std::string>& v) {
      return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    };
    record["row_count"] = count(column.row_count);
    record["distinct_count"] = count(column.distinct_count);
    record["null_count"] = count(column.null_count);
    record["min"] = scalar(column.min_value);
    record["max"] = scalar(column.max_value);
    doc["tables"][it->second]["columns"].push_back(std::move(record));
  }
  return doc.dump(2) + "\n";
}

QueryLogLoad parse_query_log_json(std::string_view text, const ColumnIndex& index) {
  QueryLogLoad result;
  std::set<QueryLogJoin> seen;
  for (const auto& edge : parse_edge_list(text)) {
    const auto left = index.find(edge.left);
    const auto right = index.find(edge.right);
    if (!left || !right) {
      skip(result.skipped, result.warnings,
           "unresolvable query-log join " + edge.left + " = " + edge.right);
      continue;
    }
    if (*left == *right) {
      skip(result.skipped, result.warnings, "query-log join of a column with itself: " + edge.left);
      continue;
    }
    const auto [i, j] = make_pair_key(*left, *right);
    if (seen.insert({i, j}).second) result.joins.push_back({i, j});
  }
  return result;
}

QueryLogLoad load_query_log(const std::filesystem::path& path, const ColumnIndex& index) {
  return parse_query_log_json(read_text_file(path), index);
}

GroundTruthLoad parse_ground_truth_json(std::string_view text, const ColumnIndex& index) {
  GroundTruthLoad result;
  std::set<PairKey> edges;
  for (const auto& edge : parse_edge_list(text)) {
    const auto left = index.find(edge.left);
    const auto right = index.find(edge.right);
    if (!left || !right) {
      skip(result.skipped, result.warnings,
           "unresolvable ground-truth edge " + edge.left + " = " + edge.right);
      continue;
    }
    if (*left == *right) throw InvalidEdge("ground-truth self-edge on " + edge.left);
    edges.insert(make_pair_key(*left, *right));
  }
  result.truth.edges.assign(edges.begin(), edges.end());
  return result;
}

GroundTruthLoad load_ground_truth(const std::filesystem::path& path, const ColumnIndex& index) {
  return parse_ground_truth_json(read_text_file(path), index);
}

std::string write_edge_list_json(const std::vector<PairKey>& edges, const ColumnIndex& index) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& [i, j] : edges) {
    doc.push_back({{"left", index.at(i).qualified_name()}, {"right", index.at(j).qualified_name()}});
  }
  return doc.dump(2) + "\n";
}

std::vector<QueryLogJoin> sample_known_joins(const GroundTruth& truth, double fraction,
                                             std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw RangeError("sample fraction must lie in [0,1], got " + std::to_string(fraction));
  }
  std::vector<PairKey> edges = truth.edges;
  std::sort(edges.begin(), edges.end());
  // Fisher-Yates driven by raw engine output so the permutation does not
  // depend on the standard library's distribution implementation.
  std::mt19937_64 engine(seed);
  for (std::size_t k = edges.size(); k > 1; --k) {
    const std::size_t pick = static_cast<std::size_t>(engine() % k);
    std::swap(edges[k - 1], edges[pick]);
  }
  const auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(edges.size())));
  std::vector<QueryLogJoin> sample;
  sample.reserve(take);
  for (std::size_t k = 0; k < take; ++k) sample.push_back({edges[k].first, edges[k].second});
  return sample;
}

}  // namespace joingraph
