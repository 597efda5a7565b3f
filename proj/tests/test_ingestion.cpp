#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "joingraph/ingestion.hpp"
#include "support/fixtures.hpp"

using namespace joingraph;
using joingraph::testing::column;
using joingraph::testing::data_path;

namespace {

const char* kTwoTables = R"js({"tables": [
  {"name": "orders", "columns": [
    {"name": "o_orderkey", "type": "INTEGER", "row_count": 100, "distinct_count": 100, "null_count": 0, "min": "1", "max": "100"},
    {"name": "o_custkey", "type": "INTEGER", "row_count": 100, "distinct_count": 40, "null_count": 0, "min": 1, "max": 50}]},
  {"name": "customer", "columns": [
    {"name": "c_custkey", "type": "INTEGER", "row_count": 50, "distinct_count": 50, "null_count": 0, "min": "1", "max": "50"},
    {"name": "c_comment", "type": "VARCHAR(117)", "row_count": null, "min": null}]}]})js";

ColumnIndex two_table_index() { return build_column_index(parse_schema_json(kTwoTables)); }

}  // namespace

TEST(SchemaJson, ParsesRecordsAndAbsentStats) {
  const auto cols = parse_schema_json(kTwoTables);
  ASSERT_EQ(cols.size(), 4u);
  EXPECT_EQ(cols[1].qualified_name(), "orders.o_custkey");
  EXPECT_EQ(cols[1].distinct_count, 40u);
  EXPECT_EQ(cols[1].max_value, "50");  // numbers are kept as their text
  EXPECT_EQ(cols[3].type, DataType::Varchar);
  EXPECT_FALSE(cols[3].row_count.has_value());
  EXPECT_FALSE(cols[3].min_value.has_value());
}

TEST(SchemaJson, TpchFixtureHas61Columns) {
  const auto cols = load_schema_file(data_path("tpch/schema.json"));
  EXPECT_EQ(cols.size(), 61u);
  std::set<std::string> tables;
  for (const auto& c : cols) tables.insert(c.table_name);
  EXPECT_EQ(tables.size(), 8u);
}

TEST(SchemaJson, EmptyTables) { EXPECT_TRUE(parse_schema_json(R"({"tables": []})").empty()); }

TEST(SchemaJson, Errors) {
  try {
    parse_schema_json("{\"tables\": [\n  {\"name\": }]}");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_schema_json(R"({"tables": [{"name": "t", "columns": [
      {"name": "c", "type": "INTEGER", "row_count": 5, "distinct_count": 6}]}]})"),
               InvalidStats);
  EXPECT_THROW(parse_schema_json(R"({"tables": [{"name": "t", "columns": [
      {"name": "c", "type": "INTEGER", "row_count": -1}]}]})"),
               FormatError);
  EXPECT_THROW(parse_schema_json(R"([1, 2])"), FormatError);
  EXPECT_THROW(load_schema_file(data_path("does/not/exist.json")), IoError);
}

TEST(SchemaJson, RoundTrip) {
  const auto cols = load_schema_file(data_path("tpch/schema.json"));
  EXPECT_EQ(parse_schema_json(write_schema_json(cols)), cols);
  const auto small = parse_schema_json(kTwoTables);
  EXPECT_EQ(parse_schema_json(write_schema_json(small)), small);
}

TEST(QueryLog, ResolvesSkipsAndDeduplicates) {
  const ColumnIndex index = two_table_index();
  const auto load = parse_query_log_json(R"([
      {"left": "orders.o_custkey", "right": "customer.c_custkey"},
      {"left": "customer.c_custkey", "right": "orders.o_custkey"},
      {"left": "orders.o_nope", "right": "customer.c_custkey"}])",
                                         index);
  ASSERT_EQ(load.joins.size(), 1u);
  EXPECT_EQ(load.joins[0].left, 1);
  EXPECT_EQ(load.joins[0].right, 2);
  EXPECT_EQ(load.skipped, 1u);
  EXPECT_FALSE(load.warnings.empty());
  EXPECT_THROW(load_query_log(data_path("missing.json"), index), IoError);
}

TEST(GroundTruthLoad, TpchAndErrors) {
  const auto cols = load_schema_file(data_path("tpch/schema.json"));
  const auto index = build_column_index(cols);
  const auto truth = load_ground_truth(data_path("tpch/truth.json"), index);
  EXPECT_EQ(truth.truth.edges.size(), 9u);
  const double density = 2.0 * truth.truth.edges.size() / (61.0 * 61.0);
  EXPECT_NEAR(density, 0.004, 0.002);

  const ColumnIndex small = two_table_index();
  EXPECT_TRUE(parse_ground_truth_json("[]", small).truth.edges.empty());
  EXPECT_THROW(parse_ground_truth_json(R"([{"left": "orders.o_custkey", "right": "orders.o_custkey"}])", small),
               InvalidEdge);
  const auto g = parse_ground_truth_json(R"([{"left": "customer.c_custkey", "right": "orders.o_custkey"}])", small);
  EXPECT_TRUE(g.truth.contains(1, 2));
  EXPECT_TRUE(g.truth.contains(2, 1));
  const JoinGraphMatrix a = g.truth.to_matrix(4);
  EXPECT_EQ(a.adjacency.sum(), 2.0);
}

TEST(EdgeListJson, RoundTrip) {
  const ColumnIndex index = two_table_index();
  const std::vector<PairKey> edges{{1, 2}, {0, 3}};
  const auto back = parse_ground_truth_json(write_edge_list_json(edges, index), index);
  EXPECT_EQ(back.truth.edges, (std::vector<PairKey>{{0, 3}, {1, 2}}));
}

TEST(SampleKnownJoins, SizesAndDeterminism) {
  GroundTruth truth;
  for (ColumnId k = 0; k < 10; ++k) truth.edges.emplace_back(k, k + 10);
  EXPECT_TRUE(sample_known_joins(truth, 0.0, 1).empty());
  EXPECT_EQ(sample_known_joins(truth, 1.0, 1).size(), 10u);
  const auto a = sample_known_joins(truth, 0.4, 7);
  EXPECT_EQ(a.size(), 4u);
  EXPECT_EQ(a, sample_known_joins(truth, 0.4, 7));
  EXPECT_THROW(sample_known_joins(truth, 1.5, 7), RangeError);
  EXPECT_THROW(sample_known_joins(truth, -0.1, 7), RangeError);
}

TEST(SampleKnownJoins, NestedAcrossFractions) {
  GroundTruth truth;
  for (ColumnId k = 0; k < 23; ++k) truth.edges.emplace_back(k, k + 30);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::vector<QueryLogJoin> previous;
    for (double f : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
      auto current = sample_known_joins(truth, f, seed);
      auto sorted_prev = previous;
      auto sorted_cur = current;
      std::sort(sorted_prev.begin(), sorted_prev.end());
      std::sort(sorted_cur.begin(), sorted_cur.end());
      EXPECT_TRUE(std::includes(sorted_cur.begin(), sorted_cur.end(), sorted_prev.begin(), sorted_prev.end()));
      previous = std::move(current);
    }
  }
}
