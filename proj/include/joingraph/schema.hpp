#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "joingraph/errors.hpp"

namespace joingraph {

using ColumnId = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using BoolArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Closed set of logical column types. Anything unrecognised maps to Other,
// which pruning treats as non-joinable.
enum class DataType {
  Integer,
  BigInt,
  Varchar,
  Date,
  Timestamp,
  Float,
  Double,
  Decimal,
  Boolean,
  Blob,
  Json,
  Array,
  Map,
  Other,
};

DataType parse_data_type(std::string_view text);
std::string_view to_string(DataType type);

bool is_numeric(DataType type);
bool is_temporal(DataType type);

// Compares two serialized scalars under the ordering of `type`: numeric parse
// for numeric types, ISO-8601 for DATE/TIMESTAMP, bytewise otherwise. Returns
// nullopt when either value cannot be interpreted.
std::optional<int> compare_values(DataType type, std::string_view a, std::string_view b);

struct ColumnMeta {
  std::string table_name;
  std::string column_name;
  DataType type = DataType::Other;
  std::optional<std::uint64_t> row_count;
  std::optional<std::uint64_t> distinct_count;
  std::optional<std::uint64_t> null_count;
  std::optional<std::string> min_value;
  std::optional<std::string> max_value;

  std::string qualified_name() const { return table_name + "." + column_name; }

  friend bool operator==(const ColumnMeta&, const ColumnMeta&) = default;
};

// Throws InvalidStats naming the column when a statistics invariant fails.
void validate(const ColumnMeta& column);

struct ColumnRef {
  std::string table;
  std::string column;

  std::string qualified_name() const { return table + "." + column; }
  friend auto operator<=>(const ColumnRef&, const ColumnRef&) = default;
};

// Splits "table.column" at the last dot.
ColumnRef parse_column_ref(std::string_view qualified);

// Dense, stable numbering of the columns of one table collection.
class ColumnIndex {
 public:
  ColumnIndex() = default;

  ColumnId size() const noexcept { return static_cast<ColumnId>(refs_.size()); }
  const ColumnRef& at(ColumnId id) const { return refs_.at(static_cast<std::size_t>(id)); }
  std::optional<ColumnId> find(const ColumnRef& ref) const;
  std::optional<ColumnId> find(std::string_view qualified) const;
  const std::vector<ColumnRef>& refs() const noexcept { return refs_; }

 private:
  friend ColumnIndex build_column_index(const std::vector<ColumnMeta>& columns);

  std::vector<ColumnRef> refs_;
  std::map<ColumnRef, ColumnId> lookup_;
};

ColumnIndex build_column_index(const std::vector<ColumnMeta>& columns);

// The set of certain positions. Always symmetric and always contains the
// diagonal; everything else is latent.
class ObservedMask {
 public:
  ObservedMask() = default;
  explicit ObservedMask(ColumnId n);

  ColumnId size() const noexcept { return observed_.rows(); }
  bool observed(ColumnId i, ColumnId j) const { return observed_(i, j); }
  bool latent(ColumnId i, ColumnId j) const { return !observed_(i, j); }

  // Marks (i, j) and (j, i) as certain.
  void observe(ColumnId i, ColumnId j);

  Eigen::Index observed_count() const { return observed_.count(); }
  Eigen::Index latent_count() const { return observed_.size() - observed_.count(); }

  // Latent positions with i < j in row-major order.
  std::vector<std::pair<ColumnId, ColumnId>> latent_pairs() const;

  const BoolArray& array() const noexcept { return observed_; }

  friend bool operator==(const ObservedMask& a, const ObservedMask& b) {
    return a.observed_.rows() == b.observed_.rows() &&
           (a.observed_ == b.observed_).all();
  }

 private:
  BoolArray observed_;
};

struct ProbabilityMatrix {
  Matrix values;
  ObservedMask mask;

  ColumnId size() const noexcept { return values.rows(); }
};

struct LatentMatrix {
  Matrix values;

  ColumnId size() const noexcept { return values.rows(); }
};

// Binary symmetric adjacency with zero diagonal: ground truth A, or the
// thresholded decision matrix.
struct JoinGraphMatrix {
  Matrix adjacency;

  ColumnId size() const noexcept { return adjacency.rows(); }
};

enum class JoinDirection {
  OneToOne,
  NToOneIJ,  // i is the "N" side, j the unique side
  NToOneJI,  // j is the "N" side, i the unique side
  Unknown,
};

std::string_view to_string(JoinDirection direction);

struct CandidatePair {
  ColumnId i = 0;
  ColumnId j = 0;
  JoinDirection direction = JoinDirection::Unknown;

  friend bool operator==(const CandidatePair&, const CandidatePair&) = default;
};

using PairKey = std::pair<ColumnId, ColumnId>;

inline PairKey make_pair_key(ColumnId a, ColumnId b) {
  return a < b ? PairKey{a, b} : PairKey{b, a};
}

// Invariant checks used by every stage and by tests. Each returns the first
// violation found, or nullopt.
std::optional<std::string> check_invariants(const ProbabilityMatrix& s);
std::optional<std::string> check_invariants(const JoinGraphMatrix& a);

// clip((X + X^T) / 2, 0, 1) with the diagonal zeroed.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> symmetrize_and_clip(
    const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  if (x.rows() != x.cols()) {
    throw ShapeError("symmetrize_and_clip: matrix is " + std::to_string(x.rows()) + "x" +
                     std::to_string(x.cols()));
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> r =
      ((x + x.transpose()) * Scalar(0.5)).cwiseMax(Scalar(0)).cwiseMin(Scalar(1));
  r.diagonal().setZero();
  return r;
}

}  // namespace joingraph
