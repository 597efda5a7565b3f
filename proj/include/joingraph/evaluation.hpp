#pragma once

#include <cstddef>
#include <vector>

#include "joingraph/ingestion.hpp"
#include "joingraph/schema.hpp"

namespace joingraph {

struct EvalResult {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  double precision = 0.0;  // 0 when nothing was predicted
  double recall = 0.0;     // 0 when the truth is empty
  double f1 = 0.0;
};

EvalResult make_eval_result(std::size_t tp, std::size_t fp, std::size_t fn);

// Compares the positive upper-triangle entries of `predicted` with the
// truth edges as undirected pairs. Truth edges outside the matrix throw
// ShapeError.
EvalResult evaluate(const JoinGraphMatrix& predicted, const GroundTruth& truth);

// Same, on an edge list over n columns. Orientation and duplicates are ignored.
EvalResult evaluate_edges(const std::vector<PairKey>& predicted, const GroundTruth& truth, ColumnId n);

}  // namespace joingraph
