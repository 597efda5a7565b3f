#include "joingraph/lrmc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

namespace joingraph {

namespace {

Eigen::VectorXd singular_values(const Matrix& m) {
  if (m.size() == 0) return Eigen::VectorXd();
  Eigen::VectorXd sv;
  if (is_symmetric(m)) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
    sv = eig.eigenvalues().cwiseAbs();
  } else {
    sv = Eigen::BDCSVD<Matrix>(m).singularValues();
  }
  std::sort(sv.data(), sv.data() + sv.size(), std::greater<>());
  return sv;
}

// Symmetrize, clip to [0,1] and pin observed entries to S. Unlike
// symmetrize_and_clip the diagonal is taken from S (always 0 there).
void project_feasible(Matrix& x, const Matrix& s, const Matrix& latent) {
  x = ((x + x.transpose()) * 0.5).cwiseMax(0.0).cwiseMin(1.0);
  x = latent.cwiseProduct(x) + (Matrix::Ones(s.rows(), s.cols()) - latent).cwiseProduct(s);
}

void finish_stats(SolveStats& stats, const ProbabilityMatrix& s, const Matrix& m, const SolverConfig& cfg) {
  stats.spectrum = singular_values(m);
  stats.numerical_rank = numerical_rank(stats.spectrum);
  stats.objective = cfg.lambda1 * stats.spectrum.sum() + cfg.lambda2 * m.cwiseAbs().sum();
  const ColumnId n = s.size();
  for (ColumnId i = 0; i < n; ++i) {
    for (ColumnId j = 0; j < n; ++j) {
      if (s.mask.latent(i, j)) {
        const double d = s.values(i, j) - m(i, j);
        stats.objective += d * d;
      }
    }
  }
}

SolveResult solve_dense(const ProbabilityMatrix& s, const SolverConfig& cfg) {
  SolveResult result;
  const ColumnId n = s.size();
  result.stats.solved_size = n;
  if (n == 0) {
    result.m.values = Matrix(0, 0);
    result.stats.converged = true;
    result.stats.spectrum = Eigen::VectorXd();
    return result;
  }

  Matrix latent(n, n);
  for (ColumnId i = 0; i < n; ++i) {
    for (ColumnId j = 0; j < n; ++j) latent(i, j) = s.mask.latent(i, j) ? 1.0 : 0.0;
  }

  // Without regularisation the data-fit term is minimised exactly by M = S.
  if (cfg.lambda1 == 0.0 && cfg.lambda2 == 0.0) {
    result.m.values = s.values;
    result.stats.converged = true;
    finish_stats(result.stats, s, result.m.values, cfg);
    return result;
  }

  const double rho = cfg.admm_rho;
  const double nuclear_tau = cfg.lambda1 / rho;
  const double l1_tau = cfg.lambda2 / rho;

  Matrix x = s.values;
  project_feasible(x, s.values, latent);
  Matrix z1 = x;
  Matrix z2 = x;
  Matrix u1 = Matrix::Zero(n, n);
  Matrix u2 = Matrix::Zero(n, n);
  Matrix average;

  SolveStats& stats = result.stats;
  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    const Matrix x_prev = x;
    const Matrix z1_prev = z1;
    const Matrix z2_prev = z2;

    // Data-fit block: per-entry quadratic, exact on latent entries.
    x = (2.0 * s.values + rho * (z1 - u1 + z2 - u2)) / (2.0 + 2.0 * rho);
    project_feasible(x, s.values, latent);

    z1 = svt_prox(x + u1, nuclear_tau);
    z1 = ((z1 + z1.transpose()) * 0.5).eval();
    z2 = soft_threshold(x + u2, l1_tau);

    u1 += x - z1;
    u2 += x - z2;

    stats.iterations = iter;
    stats.primal_residual = std::sqrt((x - z1).squaredNorm() + (x - z2).squaredNorm());
    stats.dual_residual = rho * std::sqrt((z1 - z1_prev).squaredNorm() + (z2 - z2_prev).squaredNorm());
    if (cfg.record_trace) {
      const double k = static_cast<double>(iter);
      average = iter == 1 ? x : ((average * (k - 1.0) + x) / k).eval();
      stats.objective_trace.push_back(completion_objective(s, average, cfg.lambda1, cfg.lambda2));
    }

    const double scale = std::max(1.0, x.norm());
    const double change = (x - x_prev).norm() / std::max(1.0, x_prev.norm());
    if (change <= cfg.rel_tol && stats.primal_residual <= cfg.rel_tol * scale &&
        stats.dual_residual <= cfg.rel_tol * scale) {
      stats.converged = true;
      break;
    }
  }

  result.m.values = std::move(x);
  finish_stats(stats, s, result.m.values, cfg);
  return result;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(lambda1 >= 0.0)) throw RangeError("lambda1 must be >= 0");
  if (!(lambda2 >= 0.0)) throw RangeError("lambda2 must be >= 0");
  if (!(theta > 0.0 && theta < 1.0)) throw RangeError("theta must lie in (0,1)");
  if (!(admm_rho > 0.0)) throw RangeError("admm_rho must be > 0");
  if (max_iters < 1) throw RangeError("max_iters must be positive");
  if (!(rel_tol > 0.0)) throw RangeError("rel_tol must be > 0");
}

double completion_objective(const ProbabilityMatrix& s, const Matrix& m, double lambda1, double lambda2) {
  const ColumnId n = s.size();
  if (m.rows() != n || m.cols() != n) throw ShapeError("completion_objective: shape mismatch");
  double fit = 0.0;
  for (ColumnId i = 0; i < n; ++i) {
    for (ColumnId j = 0; j < n; ++j) {
      if (s.mask.latent(i, j)) {
        const double d = s.values(i, j) - m(i, j);
        fit += d * d;
      }
    }
  }
  return fit + lambda1 * nuclear_norm(m) + lambda2 * m.cwiseAbs().sum();
}

Eigen::Index numerical_rank(const Eigen::VectorXd& singular_values, double relative_cutoff) {
  if (singular_values.size() == 0) return 0;
  const double top = singular_values.maxCoeff();
  if (top <= 0.0) return 0;
  return (singular_values.array() > relative_cutoff * top).count();
}

SolveResult solve(const ProbabilityMatrix& s, const SolverConfig& cfg) {
  cfg.validate();
  if (auto violation = check_invariants(s)) throw RangeError("solve: invalid probability matrix: " + *violation);
  const auto start = std::chrono::steady_clock::now();

  SolveResult result;
  if (cfg.use_core_submatrix) {
    const CoreExtraction core = extract_core(s);
    SolveResult inner = solve_dense(core.core, cfg);
    result.m = embed_core(inner.m, core.index, s.size());
    result.stats = std::move(inner.stats);
    // Objective and spectrum of the embedded matrix equal the core's: the
    // dropped rows are zero in both S and M.
  } else {
    result = solve_dense(s, cfg);
  }
  result.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

CoreExtraction extract_core(const ProbabilityMatrix& s) {
  const ColumnId n = s.size();
  CoreExtraction out;
  out.index.full_size = n;
  for (ColumnId i = 0; i < n; ++i) {
    if ((s.values.row(i).array() != 0.0).any()) out.index.positions.push_back(i);
  }
  const ColumnId k = out.index.size();
  out.core.values = Matrix(k, k);
  out.core.mask = ObservedMask(k);
  for (ColumnId a = 0; a < k; ++a) {
    for (ColumnId b = 0; b < k; ++b) {
      const ColumnId i = out.index.positions[static_cast<std::size_t>(a)];
      const ColumnId j = out.index.positions[static_cast<std::size_t>(b)];
      out.core.values(a, b) = s.values(i, j);
      if (b > a && s.mask.observed(i, j)) out.core.mask.observe(a, b);
    }
  }
  return out;
}

LatentMatrix embed_core(const LatentMatrix& core_m, const CoreIndex& index, ColumnId n) {
  const ColumnId k = index.size();
  if (core_m.values.rows() != k || core_m.values.cols() != k) {
    throw ShapeError("embed_core: core is " + std::to_string(core_m.values.rows()) + "x" +
                     std::to_string(core_m.values.cols()) + " but index has " + std::to_string(k) + " positions");
  }
  for (ColumnId p : index.positions) {
    if (p < 0 || p >= n) throw ShapeError("embed_core: index position out of range");
  }
  LatentMatrix full{Matrix::Zero(n, n)};
  for (ColumnId a = 0; a < k; ++a) {
    for (ColumnId b = 0; b < k; ++b) {
      full.values(index.positions[static_cast<std::size_t>(a)], index.positions[static_cast<std::size_t>(b)]) =
          core_m.values(a, b);
    }
  }
  return full;
}

JoinGraphMatrix threshold_decisions(const LatentMatrix& m, const ObservedMask& mask, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw RangeError("theta must lie in (0,1)");
  const ColumnId n = m.size();
  if (m.values.cols() != n || mask.size() != n) throw ShapeError("threshold_decisions: shape mismatch");
  JoinGraphMatrix out{Matrix::Zero(n, n)};
  for (ColumnId i = 0; i < n; ++i) {
    for (ColumnId j = i + 1; j < n; ++j) {
      const double v = mask.observed(i, j) ? m.values(i, j) : (m.values(i, j) >= theta ? 1.0 : 0.0);
      out.adjacency(i, j) = v;
      out.adjacency(j, i) = v;
    }
  }
  return out;
}

}  // namespace joingraph
