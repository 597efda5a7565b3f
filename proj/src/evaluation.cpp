#include "joingraph/evaluation.hpp"

#include <set>
#include <string>

namespace joingraph {

namespace {

void check_edge(const PairKey& e, ColumnId n, const char* what) {
  if (e.first < 0 || e.second < 0 || e.first >= n || e.second >= n) {
    throw ShapeError(std::string(what) + " edge (" + std::to_string(e.first) + ", " + std::to_string(e.second) +
                     ") outside a " + std::to_string(n) + "-column matrix");
  }
}

EvalResult compare(const std::set<PairKey>& predicted, const GroundTruth& truth, ColumnId n) {
  std::set<PairKey> expected;
  for (const auto& e : truth.edges) {
    check_edge(e, n, "truth");
    if (e.first != e.second) expected.insert(make_pair_key(e.first, e.second));
  }
  std::size_t tp = 0;
  for (const auto& e : predicted) tp += expected.count(e);
  return make_eval_result(tp, predicted.size() - tp, expected.size() - tp);
}

}  // namespace

EvalResult make_eval_result(std::size_t tp, std::size_t fp, std::size_t fn) {
  EvalResult r{tp, fp, fn, 0.0, 0.0, 0.0};
  if (tp + fp > 0) r.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) r.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (r.precision + r.recall > 0.0) r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

EvalResult evaluate(const JoinGraphMatrix& predicted, const GroundTruth& truth) {
  const ColumnId n = predicted.size();
  if (predicted.adjacency.cols() != n) throw ShapeError("evaluate: prediction matrix is not square");
  std::set<PairKey> edges;
  for (ColumnId i = 0; i < n; ++i) {
    for (ColumnId j = i + 1; j < n; ++j) {
      if (predicted.adjacency(i, j) > 0.0 || predicted.adjacency(j, i) > 0.0) edges.emplace(i, j);
    }
  }
  return compare(edges, truth, n);
}

EvalResult evaluate_edges(const std::vector<PairKey>& predicted, const GroundTruth& truth, ColumnId n) {
  std::set<PairKey> edges;
  for (const auto& e : predicted) {
    check_edge(e, n, "predicted");
    if (e.first != e.second) edges.insert(make_pair_key(e.first, e.second));
  }
  return compare(edges, truth, n);
}

}  // namespace joingraph
