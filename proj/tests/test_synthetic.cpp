#include <gtest/gtest.h>

#include <set>

#include "joingraph/analysis.hpp"
#include "joingraph/pruning.hpp"
#include "joingraph/synthetic.hpp"
#include "support/suite.hpp"

using namespace joingraph;

TEST(PortableDraws, FrozenSequence) {
  std::mt19937_64 a(42), b(42);
  for (int k = 0; k < 100; ++k) {
    const double u = uniform01(a);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    const auto v = uniform_int(b, 3, 7);
    EXPECT_GE(v, 3u);
    EXPECT_LE(v, 7u);
  }
  std::mt19937_64 c(42);
  EXPECT_EQ(uniform01(c), static_cast<double>(std::mt19937_64(42)() >> 11) * 0x1.0p-53);
}

TEST(GenerateSchema, Deterministic) {
  SyntheticOptions o;
  o.seed = 9;
  const auto a = generate_schema(o);
  const auto b = generate_schema(o);
  ASSERT_EQ(a.columns.size(), b.columns.size());
  for (std::size_t k = 0; k < a.columns.size(); ++k) {
    EXPECT_EQ(a.columns[k].qualified_name(), b.columns[k].qualified_name());
    EXPECT_EQ(a.columns[k].distinct_count, b.columns[k].distinct_count);
  }
  EXPECT_EQ(a.truth.edges, b.truth.edges);
  EXPECT_EQ(oracle_fixture_json(a), oracle_fixture_json(b));
  o.seed = 10;
  EXPECT_NE(oracle_fixture_json(generate_schema(o)), oracle_fixture_json(a));
}

TEST(GenerateSchema, ConsistentStatistics) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SyntheticOptions o;
    o.seed = seed;
    o.tables = 10;
    const auto inst = generate_schema(o);
    std::set<std::string> tables;
    for (const auto& c : inst.columns) {
      tables.insert(c.table_name);
      EXPECT_NO_THROW(validate(c));
      ASSERT_TRUE(c.row_count && c.distinct_count);
      EXPECT_LE(*c.distinct_count, *c.row_count);
      EXPECT_TRUE(inst.entity_types.contains(c.qualified_name()));
    }
    EXPECT_EQ(tables.size(), 10u);
    EXPECT_FALSE(inst.truth.edges.empty());
    // Every truth edge links two tables and survives pruning.
    const auto pruned = prune_pairs(inst.columns, filter_joinable_columns(inst.columns));
    std::set<PairKey> survivors;
    for (const auto& p : pruned.survivors) survivors.insert(make_pair_key(p.i, p.j));
    for (const auto& [i, j] : inst.truth.edges) {
      EXPECT_NE(inst.columns[static_cast<std::size_t>(i)].table_name,
                inst.columns[static_cast<std::size_t>(j)].table_name);
      EXPECT_TRUE(survivors.contains(make_pair_key(i, j)));
    }
  }
}

TEST(NoisyPredictions, FlipRateAndDeterminism) {
  std::size_t wrong = 0, total = 0;
  for (std::uint64_t k = 0; k < 10; ++k) {
    const auto inst = joingraph::testing::make_suite_instance(joingraph::testing::kSuiteSeed + k);
    const auto again = joingraph::testing::make_suite_instance(joingraph::testing::kSuiteSeed + k);
    EXPECT_EQ(inst.predictions.size(), again.predictions.size());
    for (const auto& [key, p] : inst.predictions) {
      EXPECT_EQ(again.predictions.at(key).joinable, p.joinable);
      wrong += p.joinable != inst.schema.truth.contains(key.first, key.second);
      ++total;
    }
  }
  const double rate = static_cast<double>(wrong) / static_cast<double>(total);
  EXPECT_NEAR(rate, 0.3, 0.05);

  PriorNoise none;
  none.flip_probability = 0.0;
  const auto inst = joingraph::testing::make_suite_instance(joingraph::testing::kSuiteSeed);
  const auto pruned = prune_pairs(inst.schema.columns, filter_joinable_columns(inst.schema.columns));
  for (const auto& [key, p] : noisy_predictions(inst.schema.truth, pruned.survivors, none)) {
    EXPECT_EQ(p.joinable, inst.schema.truth.contains(key.first, key.second));
  }
}

TEST(TruthfulOracle, AnswersFromInstance) {
  SyntheticOptions o;
  o.seed = 3;
  const auto inst = generate_schema(o);
  MockOracle oracle = truthful_oracle(inst);
  const auto& c = inst.columns.front();
  const ColumnContext ctx{c.table_name, c.column_name};
  EXPECT_EQ(oracle.annotate(std::span<const ColumnContext>(&ctx, 1)).front(),
            inst.entity_types.at(c.qualified_name()));
  const MockOracle parsed = MockOracle::from_json(oracle_fixture_json(inst));
  EXPECT_EQ(const_cast<MockOracle&>(parsed).annotate(std::span<const ColumnContext>(&ctx, 1)).front(),
            inst.entity_types.at(c.qualified_name()));
}

TEST(PlantedBiclique, Structure) {
  const auto p = planted_biclique(60, 6, 6, 0.3, 11);
  EXPECT_EQ(p.a.size(), 60);
  EXPECT_EQ(compute_rank(p.a), 2);
  EXPECT_DOUBLE_EQ(compute_density(p.a), 72.0 / 3600.0);
  EXPECT_EQ(p.s.values, p.a.adjacency);
  EXPECT_FALSE(check_invariants(p.s).has_value());
  const double offdiag = 60.0 * 59.0;
  const double observed = static_cast<double>(p.s.mask.observed_count() - 60);
  EXPECT_NEAR(observed / offdiag, 0.3, 0.03);
}

TEST(RandomCompletionInstance, Invariants) {
  const auto s = random_completion_instance(12, 0.4, 8);
  EXPECT_FALSE(check_invariants(s).has_value());
  for (ColumnId i = 0; i < 12; ++i) {
    EXPECT_EQ(s.values(i, i), 0.0);
    for (ColumnId j = 0; j < 12; ++j) {
      if (i != j && s.mask.observed(i, j)) {
        EXPECT_TRUE(s.values(i, j) == 0.0 || s.values(i, j) == 1.0);
      }
    }
  }
  EXPECT_EQ(random_completion_instance(12, 0.4, 8).values, s.values);
}
