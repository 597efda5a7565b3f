#include <gtest/gtest.h>

#include <random>

#include "joingraph/schema.hpp"
#include "support/fixtures.hpp"

using namespace joingraph;
using joingraph::testing::column;

TEST(ColumnIndex, DenseInInputOrder) {
  const std::vector<ColumnMeta> cols{column("a", "x", DataType::Integer), column("a", "y", DataType::Varchar),
                                     column("b", "x", DataType::Integer)};
  const ColumnIndex index = build_column_index(cols);
  ASSERT_EQ(index.size(), 3);
  EXPECT_EQ(index.find("a.x"), 0);
  EXPECT_EQ(index.find("a.y"), 1);
  EXPECT_EQ(index.find(ColumnRef{"b", "x"}), 2);
  EXPECT_FALSE(index.find("b.y").has_value());
  EXPECT_EQ(index.at(1).qualified_name(), "a.y");
}

TEST(ColumnIndex, EmptyAndDuplicate) {
  EXPECT_EQ(build_column_index({}).size(), 0);
  const std::vector<ColumnMeta> dup{column("a", "x", DataType::Integer), column("a", "x", DataType::Varchar)};
  try {
    build_column_index(dup);
    FAIL() << "expected DuplicateColumn";
  } catch (const DuplicateColumn& e) {
    EXPECT_NE(std::string(e.what()).find("a.x"), std::string::npos);
  }
}

TEST(ColumnRefParse, SplitsAtLastDot) {
  const ColumnRef r = parse_column_ref("db.schema.col");
  EXPECT_EQ(r.table, "db.schema");
  EXPECT_EQ(r.column, "col");
  EXPECT_THROW(parse_column_ref("nodot"), FormatError);
  EXPECT_THROW(parse_column_ref("trailing."), FormatError);
}

TEST(DataTypes, ParseAndOrder) {
  EXPECT_EQ(parse_data_type("int"), DataType::Integer);
  EXPECT_EQ(parse_data_type("VARCHAR(25)"), DataType::Varchar);
  EXPECT_EQ(parse_data_type("DECIMAL(15,2)"), DataType::Decimal);
  EXPECT_EQ(parse_data_type("geometry"), DataType::Other);
  EXPECT_EQ(compare_values(DataType::Integer, "9", "10"), -1);
  EXPECT_EQ(compare_values(DataType::Varchar, "9", "10"), 1);
  EXPECT_EQ(compare_values(DataType::Date, "1998-12-01", "1992-01-02"), 1);
  EXPECT_FALSE(compare_values(DataType::Double, "abc", "1").has_value());
}

TEST(ColumnMetaValidate, Invariants) {
  EXPECT_NO_THROW(validate(column("t", "c", DataType::Integer, 10, 10, 0, "1", "10")));
  EXPECT_THROW(validate(column("t", "c", DataType::Integer, 10, 11)), InvalidStats);
  EXPECT_THROW(validate(column("t", "c", DataType::Integer, 10, 5, 11)), InvalidStats);
  EXPECT_THROW(validate(column("t", "c", DataType::Integer, 10, 5, 0, "10", "9")), InvalidStats);
  // Strings compare bytewise, so "10" < "9" is a valid range.
  EXPECT_NO_THROW(validate(column("t", "c", DataType::Varchar, 10, 5, 0, "10", "9")));
}

TEST(ObservedMask, DiagonalAndComplement) {
  ObservedMask m(4);
  for (ColumnId i = 0; i < 4; ++i) EXPECT_TRUE(m.observed(i, i));
  m.observe(0, 3);
  EXPECT_TRUE(m.observed(3, 0));
  EXPECT_EQ(m.observed_count() + m.latent_count(), 16);
  EXPECT_EQ(m.latent_pairs().size(), 5u);
  EXPECT_EQ(m.latent_pairs().front(), (std::pair<ColumnId, ColumnId>{0, 1}));
}

TEST(SymmetrizeAndClip, Examples) {
  Matrix a(2, 2);
  a << 0, 0.4, 0.6, 0;
  EXPECT_DOUBLE_EQ(symmetrize_and_clip(a)(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(symmetrize_and_clip(a)(1, 0), 0.5);
  a << 0, 1.3, 1.3, 0;
  EXPECT_DOUBLE_EQ(symmetrize_and_clip(a)(0, 1), 1.0);
  a << 0.9, 0.2, 0.2, 0.9;
  const Matrix r = symmetrize_and_clip(a);
  EXPECT_EQ(r(0, 0), 0.0);
  EXPECT_EQ(r(1, 1), 0.0);
  EXPECT_DOUBLE_EQ(r(0, 1), 0.2);
  EXPECT_THROW(symmetrize_and_clip(Matrix(2, 3)), ShapeError);
}

TEST(SymmetrizeAndClip, IdempotentOnRandomInputs) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  for (int k = 0; k < 50; ++k) {
    Matrix x(6, 6);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = u(rng);
    const Matrix once = symmetrize_and_clip(x);
    EXPECT_EQ(symmetrize_and_clip(once), once);
    EXPECT_FALSE(check_invariants(ProbabilityMatrix{once, ObservedMask(6)}).has_value());
  }
}

TEST(Invariants, ProbabilityMatrixChecks) {
  ProbabilityMatrix s{Matrix::Zero(3, 3), ObservedMask(3)};
  EXPECT_FALSE(check_invariants(s).has_value());
  s.values(0, 1) = 0.5;
  EXPECT_TRUE(check_invariants(s).has_value());  // asymmetric
  s.values(1, 0) = 0.5;
  EXPECT_FALSE(check_invariants(s).has_value());  // latent entries may take any value in [0,1]
  s.mask.observe(0, 1);
  EXPECT_TRUE(check_invariants(s).has_value());  // observed entries must be 0 or 1
  JoinGraphMatrix a{Matrix::Zero(3, 3)};
  EXPECT_FALSE(check_invariants(a).has_value());
  a.adjacency(1, 1) = 1.0;
  EXPECT_TRUE(check_invariants(a).has_value());
}
