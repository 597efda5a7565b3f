#pragma once

#include <Eigen/Dense>

#include <vector>

#include "joingraph/prox.hpp"
#include "joingraph/schema.hpp"

namespace joingraph {

struct SolverConfig {
  double lambda1 = 0.5;  // nuclear-norm weight
  double lambda2 = 0.1;  // l1 weight
  double theta = 0.5;    // decision threshold
  double admm_rho = 1.0;
  int max_iters = 500;
  double rel_tol = 1e-6;
  bool use_core_submatrix = false;
  // Keeps, per iteration, the objective at the running average of the
  // iterates in SolveStats::objective_trace.
  bool record_trace = false;

  // Throws RangeError on any out-of-bounds field.
  void validate() const;
};

struct SolveStats {
  int iterations = 0;
  bool converged = false;  // false means max_iters was hit (NonConverged)
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double objective = 0.0;
  Eigen::VectorXd spectrum;  // singular values of M, descending
  Eigen::Index numerical_rank = 0;
  Eigen::Index solved_size = 0;  // n' when the core submatrix was used
  double wall_seconds = 0.0;
  std::vector<double> objective_trace;
};

struct SolveResult {
  LatentMatrix m;
  SolveStats stats;
};

// ||P_latent(S - M)||_F^2 + lambda1 * ||M||_* + lambda2 * ||M||_1.
double completion_objective(const ProbabilityMatrix& s, const Matrix& m, double lambda1, double lambda2);

// Rank cutoff used for SolveStats: sigma_k > 1e-6 * sigma_max.
Eigen::Index numerical_rank(const Eigen::VectorXd& singular_values, double relative_cutoff = 1e-6);

// Minimises the completion objective subject to M = S on observed positions
// and M in [0,1], by ADMM with a nuclear-norm copy and an l1 copy of M.
// Deterministic for fixed inputs. Honors cfg.use_core_submatrix.
SolveResult solve(const ProbabilityMatrix& s, const SolverConfig& cfg);

struct CoreIndex {
  std::vector<ColumnId> positions;  // core position -> full position, ascending
  ColumnId full_size = 0;

  ColumnId size() const noexcept { return static_cast<ColumnId>(positions.size()); }
};

struct CoreExtraction {
  ProbabilityMatrix core;
  CoreIndex index;
};

// Keeps the rows/columns of S holding at least one nonzero entry.
CoreExtraction extract_core(const ProbabilityMatrix& s);

// Places the core values at I x I of an n x n zero matrix.
LatentMatrix embed_core(const LatentMatrix& core_m, const CoreIndex& index, ColumnId n);

// Observed positions pass through; latent positions become 1(M >= theta).
JoinGraphMatrix threshold_decisions(const LatentMatrix& m, const ObservedMask& mask, double theta);

}  // namespace joingraph
