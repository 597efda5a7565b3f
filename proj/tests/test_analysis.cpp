#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "joingraph/analysis.hpp"
#include "joingraph/ingestion.hpp"
#include "joingraph/synthetic.hpp"
#include "support/fixtures.hpp"

using namespace joingraph;

namespace {

JoinGraphMatrix from_edges(ColumnId n, const std::vector<PairKey>& edges) {
  return GroundTruth{edges}.to_matrix(n);
}

}  // namespace

TEST(Density, Examples) {
  // Complete bipartite 2x2 on four columns: 8 nonzeros of 16.
  const auto a = from_edges(4, {{0, 2}, {0, 3}, {1, 2}, {1, 3}});
  EXPECT_DOUBLE_EQ(compute_density(a), 0.5);
  EXPECT_EQ(compute_rank(a), 2);
  EXPECT_DOUBLE_EQ(compute_normalized_rank(a), 0.5);

  const auto path = from_edges(4, {{0, 1}, {2, 3}});
  EXPECT_DOUBLE_EQ(compute_density(path), 0.25);

  const auto single = from_edges(10, {{3, 7}});
  EXPECT_DOUBLE_EQ(compute_density(single), 0.02);
  EXPECT_EQ(compute_rank(single), 2);
  EXPECT_DOUBLE_EQ(compute_normalized_rank(single), 0.2);
}

TEST(Density, EmptyGraph) {
  const auto a = from_edges(5, {});
  EXPECT_EQ(compute_density(a), 0.0);
  EXPECT_EQ(compute_rank(a), 0);
  EXPECT_THROW(compute_density(JoinGraphMatrix{Matrix(0, 0)}), EmptyMatrix);
  EXPECT_THROW(compute_normalized_rank(JoinGraphMatrix{Matrix(0, 0)}), EmptyMatrix);
}

TEST(Rank, BoundsAndPermutationInvariance) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const ColumnId n = 6 + static_cast<ColumnId>(uniform_int(rng, 0, 14));
    std::vector<PairKey> edges;
    for (ColumnId i = 0; i < n; ++i) {
      for (ColumnId j = i + 1; j < n; ++j) {
        if (uniform01(rng) < 0.15) edges.emplace_back(i, j);
      }
    }
    const auto a = from_edges(n, edges);
    const Eigen::Index r = compute_rank(a);
    EXPECT_GE(r, 0);
    EXPECT_LE(r, n);
    EXPECT_LE(r, 2 * static_cast<Eigen::Index>(edges.size()));

    std::vector<ColumnId> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<PairKey> permuted;
    for (const auto& [i, j] : edges) {
      permuted.push_back(make_pair_key(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]));
    }
    const auto b = from_edges(n, permuted);
    EXPECT_EQ(compute_rank(b), r);
    EXPECT_EQ(compute_density(b), compute_density(a));
  }
}

TEST(Summaries, FieldSummary) {
  const FieldSummary s = summarize_field({0.006, 0.002});
  EXPECT_DOUBLE_EQ(s.mean, 0.004);
  EXPECT_DOUBLE_EQ(s.median, 0.004);
  EXPECT_EQ(s.min, 0.002);
  EXPECT_EQ(s.max, 0.006);
  const FieldSummary odd = summarize_field({3.0, 1.0, 2.0});
  EXPECT_EQ(odd.median, 2.0);
  EXPECT_THROW(summarize_field({}), EmptyInput);
}

TEST(Summaries, Cdf) {
  const std::vector<double> v{0.1, 0.2, 0.2, 0.5};
  EXPECT_EQ(empirical_cdf(v, 0.0), 0.0);
  EXPECT_EQ(empirical_cdf(v, 0.2), 0.75);
  EXPECT_EQ(empirical_cdf(v, 1.0), 1.0);

  const auto grid = linear_grid(0.0, 1.0, 5);
  ASSERT_EQ(grid.size(), 5u);
  EXPECT_EQ(grid.front(), 0.0);
  EXPECT_EQ(grid[2], 0.5);
  EXPECT_EQ(grid.back(), 1.0);
  EXPECT_EQ(linear_grid(0.0, 1.0).size(), 200u);
}

TEST(Summaries, Collection) {
  std::vector<GraphStats> stats(2);
  stats[0].density = 0.002;
  stats[0].normalized_rank = 0.1;
  stats[1].density = 0.006;
  stats[1].normalized_rank = 0.3;
  const CollectionSummary c = summarize_collection(stats, linear_grid(0.0, 1.0, 11));
  EXPECT_EQ(c.count, 2u);
  EXPECT_DOUBLE_EQ(c.density.mean, 0.004);
  EXPECT_DOUBLE_EQ(c.density.median, 0.004);
  ASSERT_EQ(c.normalized_rank_cdf.size(), 11u);
  EXPECT_EQ(c.normalized_rank_cdf[1], 0.5);
  EXPECT_EQ(c.normalized_rank_cdf[3], 1.0);
  for (std::size_t k = 1; k < c.density_cdf.size(); ++k) EXPECT_GE(c.density_cdf[k], c.density_cdf[k - 1]);

  const std::string csv = cdf_csv(c);
  EXPECT_EQ(csv.rfind("grid,density_cdf,normalized_rank_cdf\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 12);
}

TEST(GraphStatsTest, Tpch) {
  const auto columns = load_schema_file(joingraph::testing::data_path("tpch/schema.json"));
  const auto index = build_column_index(columns);
  const auto truth = load_ground_truth(joingraph::testing::data_path("tpch/truth.json"), index);
  const GraphStats s = graph_stats(columns, truth.truth);
  EXPECT_EQ(s.n, 61);
  EXPECT_EQ(s.nnz, 18);
  EXPECT_EQ(s.table_count, 8u);
  EXPECT_DOUBLE_EQ(s.avg_columns_per_table, 61.0 / 8.0);
  EXPECT_DOUBLE_EQ(s.density, 18.0 / (61.0 * 61.0));
  EXPECT_GE(s.density, 0.002);
  EXPECT_LE(s.density, 0.006);
  EXPECT_GE(s.normalized_rank, 0.15);
  EXPECT_LE(s.normalized_rank, 0.25);
  EXPECT_NE(graph_stats_json(s).find("\"normalized_rank\""), std::string::npos);
}
