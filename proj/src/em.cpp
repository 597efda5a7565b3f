#include "joingraph/em.hpp"

#include <algorithm>
#include <set>

namespace joingraph {

namespace {

std::pair<std::string, std::string> type_pair(const std::string& a, const std::string& b) {
  std::string na = normalize_entity_type(a);
  std::string nb = normalize_entity_type(b);
  if (nb < na) std::swap(na, nb);
  return {std::move(na), std::move(nb)};
}

bool is_unknown(const std::string& normalized) {
  return normalized.empty() || normalized == kUnknownEntityType;
}

TypedColumn typed(const ColumnIndex& index, ColumnId id, const std::string& entity_type) {
  const auto& ref = index.at(id);
  return TypedColumn{ref.table, ref.column, entity_type};
}

enum class Verdict { Compatible, Incompatible, Pending, Unavailable };

// Decides from the cache alone where possible.
Verdict local_verdict(const std::string* ta, const std::string* tb, const EntityTypeCache& cache) {
  if (!ta || !tb) return Verdict::Unavailable;
  const auto [na, nb] = type_pair(*ta, *tb);
  if (is_unknown(na) || is_unknown(nb)) return Verdict::Incompatible;
  if (na == nb) return Verdict::Compatible;
  if (auto cached = cache.find_match(na, nb)) return *cached ? Verdict::Compatible : Verdict::Incompatible;
  return Verdict::Pending;
}

}  // namespace

void EmConfig::validate() const {
  if (gamma < 1) throw RangeError("gamma must be a positive integer");
  if (!(epsilon > 0.0)) throw RangeError("epsilon must be > 0");
  if (!(low_threshold >= 0.0 && low_threshold <= 1.0)) throw RangeError("low_threshold must lie in [0,1]");
  if (!(high_threshold >= 0.0 && high_threshold <= 1.0)) throw RangeError("high_threshold must lie in [0,1]");
  if (low_threshold > high_threshold) throw RangeError("low_threshold must not exceed high_threshold");
  if (!(delta > 0.0 && delta < 1.0)) throw RangeError("delta must lie in (0,1)");
  if (oracle_batch_size == 0) throw RangeError("oracle batch size must be positive");
}

const std::string* EntityTypeCache::find(ColumnId column) const {
  auto it = types_.find(column);
  return it == types_.end() ? nullptr : &it->second;
}

bool EntityTypeCache::insert(ColumnId column, std::string entity_type) {
  return types_.emplace(column, std::move(entity_type)).second;
}

std::optional<bool> EntityTypeCache::find_match(const std::string& a, const std::string& b) const {
  auto it = matches_.find(type_pair(a, b));
  if (it == matches_.end()) return std::nullopt;
  return it->second;
}

bool EntityTypeCache::insert_match(const std::string& a, const std::string& b, bool matches) {
  return matches_.emplace(type_pair(a, b), matches).second;
}

MStepStats annotate_entity_types(std::span<const ColumnId> columns, const ColumnIndex& index,
                                 SemanticOracle& oracle, EntityTypeCache& cache, const EmConfig& cfg) {
  MStepStats stats;
  std::vector<ColumnId> pending;
  std::set<ColumnId> seen;
  for (ColumnId c : columns) {
    if (!cache.contains(c) && seen.insert(c).second) pending.push_back(c);
  }
  if (pending.empty()) return stats;

  std::vector<ColumnContext> contexts;
  contexts.reserve(pending.size());
  for (ColumnId c : pending) contexts.push_back({index.at(c).table, index.at(c).column});

  const auto replies = run_batches(
      contexts.size(), cfg.oracle_batch_size, cfg.max_in_flight,
      [&](std::size_t first, std::size_t count) {
        return oracle.annotate(std::span<const ColumnContext>(contexts).subspan(first, count));
      },
      &stats.failures);
  stats.annotate_requests = replies.size();

  std::size_t answered = 0;
  for (std::size_t b = 0; b < replies.size(); ++b) {
    if (!replies[b]) continue;
    const std::size_t first = b * cfg.oracle_batch_size;
    const std::size_t count = std::min(cfg.oracle_batch_size, pending.size() - first);
    if (replies[b]->size() != count) {
      throw ProtocolError("oracle returned " + std::to_string(replies[b]->size()) +
                          " entity types for " + std::to_string(count) + " columns");
    }
    ++answered;
    for (std::size_t k = 0; k < count; ++k) {
      std::string type = (*replies[b])[k];
      if (normalize_entity_type(type).empty()) type = kUnknownEntityType;
      cache.insert(pending[first + k], std::move(type));
    }
  }
  stats.oracle_unreachable = answered == 0;
  return stats;
}

std::optional<bool> soft_type_match(const TypedColumn& a, const TypedColumn& b, SemanticOracle& oracle,
                                    EntityTypeCache& cache) {
  const auto [na, nb] = type_pair(a.entity_type, b.entity_type);
  if (is_unknown(na) || is_unknown(nb)) return false;
  if (na == nb) return true;
  if (auto cached = cache.find_match(na, nb)) return cached;
  try {
    const TypeMatchQuery query{a, b};
    const auto reply = oracle.soft_match(std::span<const TypeMatchQuery>(&query, 1));
    if (reply.size() != 1) throw ProtocolError("oracle returned a malformed soft-match reply");
    cache.insert_match(na, nb, reply.front());
    return reply.front();
  } catch (const OracleError&) {
    return std::nullopt;
  }
}

MStepResult update_prob_matrix(const LatentMatrix& m, const ProbabilityMatrix& s, EntityTypeCache& cache,
                               const EmConfig& cfg, SemanticOracle& oracle, const ColumnIndex& index) {
  cfg.validate();
  const ColumnId n = s.size();
  if (m.size() != n || m.values.cols() != n || index.size() != n) {
    throw ShapeError("update_prob_matrix: latent matrix, probability matrix and index disagree in size");
  }

  // The refined matrix starts from the recovered values on latent positions.
  MStepResult out{s, {}};
  for (const auto& [i, j] : s.mask.latent_pairs()) {
    const double v = std::clamp(m.values(i, j), 0.0, 1.0);
    out.s.values(i, j) = v;
    out.s.values(j, i) = v;
  }

  std::vector<PairKey> candidates;
  std::vector<ColumnId> columns;
  for (const auto& [i, j] : s.mask.latent_pairs()) {
    if (out.s.values(i, j) >= cfg.low_threshold) {
      candidates.emplace_back(i, j);
      columns.push_back(i);
      columns.push_back(j);
    }
  }
  MStepStats& stats = out.stats;
  stats.candidates = candidates.size();
  if (candidates.empty()) return out;

  const MStepStats annotated = annotate_entity_types(columns, index, oracle, cache, cfg);
  stats.annotate_requests = annotated.annotate_requests;
  stats.failures = annotated.failures;

  // Resolve what the cache can; queue one soft-match query per unseen type pair.
  std::vector<Verdict> verdicts(candidates.size());
  std::vector<TypeMatchQuery> queries;
  std::map<std::pair<std::string, std::string>, std::size_t> query_slot;
  std::vector<std::size_t> slot_of(candidates.size(), 0);
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const auto [i, j] = candidates[k];
    const std::string* ti = cache.find(i);
    const std::string* tj = cache.find(j);
    verdicts[k] = local_verdict(ti, tj, cache);
    if (verdicts[k] != Verdict::Pending) continue;
    auto [it, inserted] = query_slot.emplace(type_pair(*ti, *tj), queries.size());
    if (inserted) queries.push_back({typed(index, i, *ti), typed(index, j, *tj)});
    slot_of[k] = it->second;
  }

  std::vector<std::optional<bool>> matched(queries.size());
  if (!queries.empty()) {
    const auto replies = run_batches(
        queries.size(), cfg.oracle_batch_size, cfg.max_in_flight,
        [&](std::size_t first, std::size_t count) {
          return oracle.soft_match(std::span<const TypeMatchQuery>(queries).subspan(first, count));
        },
        &stats.failures);
    stats.match_requests = replies.size();
    for (std::size_t b = 0; b < replies.size(); ++b) {
      if (!replies[b]) continue;
      const std::size_t first = b * cfg.oracle_batch_size;
      const std::size_t count = std::min(cfg.oracle_batch_size, queries.size() - first);
      if (replies[b]->size() != count) {
        throw ProtocolError("oracle returned " + std::to_string(replies[b]->size()) + " matches for " +
                            std::to_string(count) + " pairs");
      }
      for (std::size_t k = 0; k < count; ++k) {
        const bool verdict = (*replies[b])[k];
        matched[first + k] = verdict;
        cache.insert_match(queries[first + k].a.entity_type, queries[first + k].b.entity_type, verdict);
      }
    }
  }

  const std::size_t requests = stats.annotate_requests + stats.match_requests;
  stats.oracle_unreachable = requests > 0 && stats.failures.size() == requests;

  // Apply updates in pair order once every reply is in.
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    Verdict verdict = verdicts[k];
    if (verdict == Verdict::Pending) {
      const auto& reply = matched[slot_of[k]];
      verdict = !reply ? Verdict::Unavailable : (*reply ? Verdict::Compatible : Verdict::Incompatible);
    }
    const auto [i, j] = candidates[k];
    double& p = out.s.values(i, j);
    switch (verdict) {
      case Verdict::Compatible:
        if (p >= cfg.high_threshold) {
          p = 1.0;
          out.s.mask.observe(i, j);
          ++stats.promoted;
        } else {
          p = cfg.high_threshold;
          ++stats.boosted;
        }
        break;
      case Verdict::Incompatible:
        p *= cfg.delta;
        ++stats.decayed;
        break;
      default:
        ++stats.untouched_on_failure;
        break;
    }
    out.s.values(j, i) = p;
  }
  return out;
}

EmResult em_infer(const ProbabilityMatrix& s0, const EmConfig& cfg, const SolverConfig& solver_cfg,
                  SemanticOracle& oracle, const ColumnIndex& index) {
  cfg.validate();
  solver_cfg.validate();

  EmResult result;
  ProbabilityMatrix s = s0;
  std::optional<Matrix> previous;

  for (int t = 0; t < cfg.gamma; ++t) {
    EmIteration iteration;
    iteration.t = t;
    iteration.latent_before = s.mask.latent_count();

    SolveResult solved = solve(s, solver_cfg);
    iteration.solve = solved.stats;
    if (previous) iteration.frobenius_delta = (solved.m.values - *previous).norm();
    previous = solved.m.values;
    result.m = std::move(solved.m);
    result.s = s;

    if (t == cfg.gamma - 1) {
      result.trace.exit_reason = "max_iterations";
      result.trace.iterations.push_back(std::move(iteration));
      break;
    }
    if (t > 0) {
      if (iteration.latent_before == 0) {
        result.trace.exit_reason = "no_candidates";
        result.trace.iterations.push_back(std::move(iteration));
        break;
      }
      if (*iteration.frobenius_delta <= cfg.epsilon) {
        result.trace.exit_reason = "converged";
        result.trace.iterations.push_back(std::move(iteration));
        break;
      }
    }

    MStepResult step = update_prob_matrix(result.m, s, result.cache, cfg, oracle, index);
    const bool unreachable = step.stats.oracle_unreachable;
    iteration.m_step = std::move(step.stats);
    result.trace.iterations.push_back(std::move(iteration));
    if (unreachable) {
      result.trace.degraded = true;
      result.trace.exit_reason = "oracle_unreachable";
      break;
    }
    s = std::move(step.s);
  }
  return result;
}

}  // namespace joingraph
