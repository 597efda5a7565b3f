#pragma once

#include <span>
#include <string>
#include <vector>

#include "joingraph/ingestion.hpp"
#include "joingraph/schema.hpp"

namespace joingraph {

struct GraphStats {
  Eigen::Index n = 0;
  Eigen::Index nnz = 0;
  double density = 0.0;
  Eigen::Index rank = 0;
  double normalized_rank = 0.0;
  std::size_t table_count = 0;
  double avg_columns_per_table = 0.0;
};

// nnz(A) / n^2, both orientations of an edge counted.
double compute_density(const JoinGraphMatrix& a);

// Numerical rank with cutoff sigma_k > n * eps * sigma_max.
Eigen::Index compute_rank(const JoinGraphMatrix& a);
double compute_normalized_rank(const JoinGraphMatrix& a);

GraphStats graph_stats(std::span<const ColumnMeta> columns, const GroundTruth& truth);

struct FieldSummary {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double median = 0.0;
};

FieldSummary summarize_field(std::vector<double> values);

// Fraction of values <= x.
double empirical_cdf(std::span<const double> values, double x);

// `points` evenly spaced values on [lo, hi], both ends included.
std::vector<double> linear_grid(double lo, double hi, std::size_t points = 200);

struct CollectionSummary {
  std::size_t count = 0;
  FieldSummary n;
  FieldSummary nnz;
  FieldSummary density;
  FieldSummary rank;
  FieldSummary normalized_rank;
  FieldSummary table_count;
  FieldSummary avg_columns_per_table;
  std::vector<double> grid;
  std::vector<double> density_cdf;
  std::vector<double> normalized_rank_cdf;
};

// Summaries per field and CDFs of density and normalized rank over `grid`
// (default: 200 points on [0,1]).
CollectionSummary summarize_collection(std::span<const GraphStats> stats, std::vector<double> grid = {});

// grid,density_cdf,normalized_rank_cdf
std::string cdf_csv(const CollectionSummary& summary);

std::string graph_stats_json(const GraphStats& stats);
std::string collection_summary_json(const CollectionSummary& summary);

}  // namespace joingraph
