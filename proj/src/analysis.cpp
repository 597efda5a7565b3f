#include "joingraph/analysis.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

namespace joingraph {

namespace {

using ordered_json = nlohmann::ordered_json;

void require_square(const JoinGraphMatrix& a) {
  if (a.adjacency.rows() != a.adjacency.cols()) throw ShapeError("join graph matrix is not square");
  if (a.size() == 0) throw EmptyMatrix("join graph matrix has no columns");
}

ordered_json field_json(const FieldSummary& f) {
  return ordered_json{{"min", f.min}, {"max", f.max}, {"mean", f.mean}, {"median", f.median}};
}

}  // namespace

double compute_density(const JoinGraphMatrix& a) {
  require_square(a);
  const double n = static_cast<double>(a.size());
  return static_cast<double>((a.adjacency.array() != 0.0).count()) / (n * n);
}

Eigen::Index compute_rank(const JoinGraphMatrix& a) {
  require_square(a);
  const Eigen::VectorXd sv = Eigen::BDCSVD<Matrix>(a.adjacency).singularValues();
  const double top = sv.size() ? sv.maxCoeff() : 0.0;
  if (top <= 0.0) return 0;
  const double cutoff = static_cast<double>(a.size()) * std::numeric_limits<double>::epsilon() * top;
  return (sv.array() > cutoff).count();
}

double compute_normalized_rank(const JoinGraphMatrix& a) {
  return static_cast<double>(compute_rank(a)) / static_cast<double>(a.size());
}

GraphStats graph_stats(std::span<const ColumnMeta> columns, const GroundTruth& truth) {
  GraphStats s;
  s.n = static_cast<Eigen::Index>(columns.size());
  const JoinGraphMatrix a = truth.to_matrix(s.n);
  s.nnz = (a.adjacency.array() != 0.0).count();
  s.density = compute_density(a);
  s.rank = compute_rank(a);
  s.normalized_rank = static_cast<double>(s.rank) / static_cast<double>(s.n);
  std::set<std::string> tables;
  for (const auto& c : columns) tables.insert(c.table_name);
  s.table_count = tables.size();
  s.avg_columns_per_table = static_cast<double>(columns.size()) / static_cast<double>(tables.size());
  return s;
}

FieldSummary summarize_field(std::vector<double> values) {
  if (values.empty()) throw EmptyInput("summarize_field: no values");
  std::sort(values.begin(), values.end());
  FieldSummary f;
  f.min = values.front();
  f.max = values.back();
  f.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  const std::size_t mid = values.size() / 2;
  f.median = values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
  return f;
}

double empirical_cdf(std::span<const double> values, double x) {
  if (values.empty()) throw EmptyInput("empirical_cdf: no values");
  const auto below = std::count_if(values.begin(), values.end(), [x](double v) { return v <= x; });
  return static_cast<double>(below) / static_cast<double>(values.size());
}

std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
  if (points == 0) return {};
  if (points == 1) return {lo};
  std::vector<double> grid(points);
  for (std::size_t k = 0; k < points; ++k) {
    grid[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
  }
  return grid;
}

CollectionSummary summarize_collection(std::span<const GraphStats> stats, std::vector<double> grid) {
  if (stats.empty()) throw EmptyInput("summarize_collection: no schemas");
  const auto field = [&](auto get) {
    std::vector<double> v;
    v.reserve(stats.size());
    for (const auto& s : stats) v.push_back(static_cast<double>(get(s)));
    return v;
  };
  CollectionSummary out;
  out.count = stats.size();
  out.n = summarize_field(field([](const GraphStats& s) { return s.n; }));
  out.nnz = summarize_field(field([](const GraphStats& s) { return s.nnz; }));
  const auto densities = field([](const GraphStats& s) { return s.density; });
  const auto ranks = field([](const GraphStats& s) { return s.normalized_rank; });
  out.density = summarize_field(densities);
  out.rank = summarize_field(field([](const GraphStats& s) { return s.rank; }));
  out.normalized_rank = summarize_field(ranks);
  out.table_count = summarize_field(field([](const GraphStats& s) { return s.table_count; }));
  out.avg_columns_per_table = summarize_field(field([](const GraphStats& s) { return s.avg_columns_per_table; }));

  out.grid = grid.empty() ? linear_grid(0.0, 1.0) : std::move(grid);
  for (double x : out.grid) {
    out.density_cdf.push_back(empirical_cdf(densities, x));
    out.normalized_rank_cdf.push_back(empirical_cdf(ranks, x));
  }
  return out;
}

std::string cdf_csv(const CollectionSummary& summary) {
  std::ostringstream os;
  os.precision(10);
  os << "grid,density_cdf,normalized_rank_cdf\n";
  for (std::size_t k = 0; k < summary.grid.size(); ++k) {
    os << summary.grid[k] << ',' << summary.density_cdf[k] << ',' << summary.normalized_rank_cdf[k] << '\n';
  }
  return os.str();
}

std::string graph_stats_json(const GraphStats& s) {
  ordered_json j{{"n", s.n},
                 {"nnz", s.nnz},
                 {"density", s.density},
                 {"rank", s.rank},
                 {"normalized_rank", s.normalized_rank},
                 {"table_count", s.table_count},
                 {"avg_columns_per_table", s.avg_columns_per_table}};
  return j.dump(2) + "\n";
}

std::string collection_summary_json(const CollectionSummary& s) {
  ordered_json j{{"count", s.count},
                 {"n", field_json(s.n)},
                 {"nnz", field_json(s.nnz)},
                 {"density", field_json(s.density)},
                 {"rank", field_json(s.rank)},
                 {"normalized_rank", field_json(s.normalized_rank)},
                 {"table_count", field_json(s.table_count)},
                 {"avg_columns_per_table", field_json(s.avg_columns_per_table)}};
  return j.dump(2) + "\n";
}

}  // namespace joingraph
