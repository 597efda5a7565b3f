#include "joingraph/schema.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <tuple>

namespace joingraph {

namespace {

struct TypeName {
  std::string_view name;
  DataType type;
};

constexpr std::array<TypeName, 24> kTypeNames{{
    {"INTEGER", DataType::Integer},     {"INT", DataType::Integer},
    {"INT4", DataType::Integer},        {"SMALLINT", DataType::Integer},
    {"BIGINT", DataType::BigInt},       {"INT8", DataType::BigInt},
    {"VARCHAR", DataType::Varchar},     {"CHAR", DataType::Varchar},
    {"TEXT", DataType::Varchar},        {"STRING", DataType::Varchar},
    {"DATE", DataType::Date},           {"TIMESTAMP", DataType::Timestamp},
    {"DATETIME", DataType::Timestamp},  {"FLOAT", DataType::Float},
    {"REAL", DataType::Float},          {"DOUBLE", DataType::Double},
    {"DECIMAL", DataType::Decimal},     {"NUMERIC", DataType::Decimal},
    {"BOOLEAN", DataType::Boolean},     {"BOOL", DataType::Boolean},
    {"BLOB", DataType::Blob},           {"JSON", DataType::Json},
    {"ARRAY", DataType::Array},         {"MAP", DataType::Map},
}};

std::optional<double> parse_number(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) {
    text.remove_prefix(1);
  }
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
    text.remove_suffix(1);
  }
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::optional<std::int64_t> parse_integer(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

using Instant = std::tuple<int, int, int, int, int, double>;

// Accepts YYYY-MM-DD optionally followed by [T ]HH:MM[:SS[.fff]].
std::optional<Instant> parse_instant(std::string_view text) {
  const std::string s(text);
  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  double sec = 0.0;
  int consumed = 0;
  if (std::sscanf(s.c_str(), "%d-%d-%d%n", &y, &mo, &d, &consumed) != 3) return std::nullopt;
  if (mo < 1 || mo > 12 || d < 1 || d > 31) return std::nullopt;
  std::string_view rest = std::string_view(s).substr(static_cast<std::size_t>(consumed));
  if (!rest.empty()) {
    if (rest.front() != 'T' && rest.front() != ' ') return std::nullopt;
    const std::string time(rest.substr(1));
    const int n = std::sscanf(time.c_str(), "%d:%d:%lf", &h, &mi, &sec);
    if (n < 2) return std::nullopt;
  }
  return Instant{y, mo, d, h, mi, sec};
}

template <typename T>
int three_way(const T& a, const T& b) {
  return a < b ? -1 : (b < a ? 1 : 0);
}

bool is_ordered(DataType type) {
  return is_numeric(type) || is_temporal(type) || type == DataType::Varchar;
}

}  // namespace

DataType parse_data_type(std::string_view text) {
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  // Strip parameters such as VARCHAR(25) or DECIMAL(15,2).
  if (auto paren = upper.find('('); paren != std::string::npos) upper.resize(paren);
  while (!upper.empty() && upper.back() == ' ') upper.pop_back();
  for (const auto& entry : kTypeNames) {
    if (entry.name == upper) return entry.type;
  }
  return DataType::Other;
}

std::string_view to_string(DataType type) {
  switch (type) {
    case DataType::Integer: return "INTEGER";
    case DataType::BigInt: return "BIGINT";
    case DataType::Varchar: return "VARCHAR";
    case DataType::Date: return "DATE";
    case DataType::Timestamp: return "TIMESTAMP";
    case DataType::Float: return "FLOAT";
    case DataType::Double: return "DOUBLE";
    case DataType::Decimal: return "DECIMAL";
    case DataType::Boolean: return "BOOLEAN";
    case DataType::Blob: return "BLOB";
    case DataType::Json: return "JSON";
    case DataType::Array: return "ARRAY";
    case DataType::Map: return "MAP";
    case DataType::Other: return "OTHER";
  }
  return "OTHER";
}

bool is_numeric(DataType type) {
  switch (type) {
    case DataType::Integer:
    case DataType::BigInt:
    case DataType::Float:
    case DataType::Double:
    case DataType::Decimal:
      return true;
    default:
      return false;
  }
}

bool is_temporal(DataType type) {
  return type == DataType::Date || type == DataType::Timestamp;
}

std::optional<int> compare_values(DataType type, std::string_view a, std::string_view b) {
  if (type == DataType::Integer || type == DataType::BigInt) {
    const auto ia = parse_integer(a);
    const auto ib = parse_integer(b);
    if (ia && ib) return three_way(*ia, *ib);
  }
  if (is_numeric(type)) {
    const auto da = parse_number(a);
    const auto db = parse_number(b);
    if (!da || !db) return std::nullopt;
    return three_way(*da, *db);
  }
  if (is_temporal(type)) {
    const auto ta = parse_instant(a);
    const auto tb = parse_instant(b);
    if (!ta || !tb) return std::nullopt;
    return three_way(*ta, *tb);
  }
  const int c = a.compare(b);
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

void validate(const ColumnMeta& column) {
  const auto fail = [&](const std::string& why) {
    throw InvalidStats("column " + column.qualified_name() + ": " + why);
  };
  if (column.table_name.empty() || column.column_name.empty()) fail("empty table or column name");
  if (column.row_count) {
    if (column.distinct_count && *column.distinct_count > *column.row_count) {
      fail("distinct_count exceeds row_count");
    }
    if (column.null_count && *column.null_count > *column.row_count) {
      fail("null_count exceeds row_count");
    }
  }
  if (column.min_value && column.max_value && is_ordered(column.type)) {
    const auto order = compare_values(column.type, *column.min_value, *column.max_value);
    if (!order) fail("min/max not parseable as " + std::string(to_string(column.type)));
    if (*order > 0) fail("min exceeds max");
  }
}

ColumnRef parse_column_ref(std::string_view qualified) {
  const auto dot = qualified.rfind('.');
  if (dot == std::string_view::npos || dot == 0 || dot + 1 == qualified.size()) {
    throw FormatError("expected \"table.column\", got \"" + std::string(qualified) + "\"");
  }
  return ColumnRef{std::string(qualified.substr(0, dot)), std::string(qualified.substr(dot + 1))};
}

std::optional<ColumnId> ColumnIndex::find(const ColumnRef& ref) const {
  if (auto it = lookup_.find(ref); it != lookup_.end()) return it->second;
  return std::nullopt;
}

std::optional<ColumnId> ColumnIndex::find(std::string_view qualified) const {
  const auto dot = qualified.rfind('.');
  if (dot == std::string_view::npos) return std::nullopt;
  return find(ColumnRef{std::string(qualified.substr(0, dot)),
                        std::string(qualified.substr(dot + 1))});
}

ColumnIndex build_column_index(const std::vector<ColumnMeta>& columns) {
  ColumnIndex index;
  index.refs_.reserve(columns.size());
  for (const auto& column : columns) {
    ColumnRef ref{column.table_name, column.column_name};
    const auto id = static_cast<ColumnId>(index.refs_.size());
    if (!index.lookup_.emplace(ref, id).second) {
      throw DuplicateColumn("duplicate column " + ref.qualified_name());
    }
    index.refs_.push_back(std::move(ref));
  }
  return index;
}

ObservedMask::ObservedMask(ColumnId n) : observed_(BoolArray::Constant(n, n, false)) {
  for (ColumnId i = 0; i < n; ++i) observed_(i, i) = true;
}

void ObservedMask::observe(ColumnId i, ColumnId j) {
  observed_(i, j) = true;
  observed_(j, i) = true;
}

std::vector<std::pair<ColumnId, ColumnId>> ObservedMask::latent_pairs() const {
  std::vector<std::pair<ColumnId, ColumnId>> pairs;
  const ColumnId n = size();
  for (ColumnId i = 0; i < n; ++i) {
    for (ColumnId j = i + 1; j < n; ++j) {
      if (!observed_(i, j)) pairs.emplace_back(i, j);
    }
  }
  return pairs;
}

std::string_view to_string(JoinDirection direction) {
  switch (direction) {
    case JoinDirection::OneToOne: return "one_to_one";
    case JoinDirection::NToOneIJ: return "n_to_one_ij";
    case JoinDirection::NToOneJI: return "n_to_one_ji";
    case JoinDirection::Unknown: return "unknown";
  }
  return "unknown";
}

std::optional<std::string> check_invariants(const ProbabilityMatrix& s) {
  const ColumnId n = s.values.rows();
  if (s.values.cols() != n) return "probability matrix is not square";
  if (s.mask.size() != n) return "mask size differs from matrix size";
  for (ColumnId i = 0; i < n; ++i) {
    if (s.values(i, i) != 0.0) return "nonzero diagonal at " + std::to_string(i);
    if (!s.mask.observed(i, i)) return "diagonal missing from mask at " + std::to_string(i);
    for (ColumnId j = 0; j < n; ++j) {
      const double v = s.values(i, j);
      if (!(v >= 0.0 && v <= 1.0)) {
        return "entry (" + std::to_string(i) + "," + std::to_string(j) + ") outside [0,1]";
      }
      if (v != s.values(j, i)) {
        return "asymmetric entry (" + std::to_string(i) + "," + std::to_string(j) + ")";
      }
      if (s.mask.observed(i, j) != s.mask.observed(j, i)) {
        return "asymmetric mask at (" + std::to_string(i) + "," + std::to_string(j) + ")";
      }
      if (s.mask.observed(i, j) && v != 0.0 && v != 1.0) {
        return "observed entry (" + std::to_string(i) + "," + std::to_string(j) +
               ") is neither 0 nor 1";
      }
    }
  }
  return std::nullopt;
}

std::optional<std::string> check_invariants(const JoinGraphMatrix& a) {
  const ColumnId n = a.adjacency.rows();
  if (a.adjacency.cols() != n) return "adjacency matrix is not square";
  for (ColumnId i = 0; i < n; ++i) {
    if (a.adjacency(i, i) != 0.0) return "nonzero diagonal at " + std::to_string(i);
    for (ColumnId j = 0; j < n; ++j) {
      const double v = a.adjacency(i, j);
      if (v != 0.0 && v != 1.0) return "non-binary entry";
      if (v != a.adjacency(j, i)) return "asymmetric adjacency";
    }
  }
  return std::nullopt;
}

}  // namespace joingraph
