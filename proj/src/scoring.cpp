#include "joingraph/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <set>

#include <json.hpp>

#include "joingraph/ingestion.hpp"

namespace joingraph {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;
constexpr std::uint64_t kEmbeddingSeed = 0x6a6f696e67726170ULL;

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = kFnvOffset ^ kEmbeddingSeed;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= kFnvPrime;
  }
  return h;
}

double ratio_or_zero(const std::optional<std::uint64_t>& num, const std::optional<std::uint64_t>& den) {
  if (!num || !den || *den == 0) return 0.0;
  return std::min(1.0, static_cast<double>(*num) / static_cast<double>(*den));
}

}  // namespace

std::vector<std::string> name_tokens(std::string_view name) {
  std::vector<std::string> tokens;
  std::string current;
  const auto flush = [&] {
    if (!current.empty()) tokens.push_back(lowercase(current));
    current.clear();
  };
  for (std::size_t k = 0; k < name.size(); ++k) {
    const auto c = static_cast<unsigned char>(name[k]);
    if (!std::isalnum(c)) {
      flush();
      continue;
    }
    if (!current.empty()) {
      const auto prev = static_cast<unsigned char>(current.back());
      const bool next_lower = k + 1 < name.size() && std::islower(static_cast<unsigned char>(name[k + 1]));
      const bool camel = std::isupper(c) && (std::islower(prev) || std::isdigit(prev) ||
                                             (std::isupper(prev) && next_lower));
      const bool digit_edge = static_cast<bool>(std::isdigit(c)) != static_cast<bool>(std::isdigit(prev));
      if (camel || digit_edge) flush();
    }
    current.push_back(static_cast<char>(c));
  }
  flush();
  return tokens;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

double jaro(std::string_view a, std::string_view b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  const std::size_t window = std::max<std::size_t>(std::max(a.size(), b.size()) / 2, 1) - 1;
  std::vector<bool> a_match(a.size(), false);
  std::vector<bool> b_match(b.size(), false);
  std::size_t matches = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::size_t lo = i > window ? i - window : 0;
    const std::size_t hi = std::min(b.size(), i + window + 1);
    for (std::size_t j = lo; j < hi; ++j) {
      if (!b_match[j] && a[i] == b[j]) {
        a_match[i] = b_match[j] = true;
        ++matches;
        break;
      }
    }
  }
  if (matches == 0) return 0.0;
  std::size_t half_transpositions = 0;
  for (std::size_t i = 0, j = 0; i < a.size(); ++i) {
    if (!a_match[i]) continue;
    while (!b_match[j]) ++j;
    if (a[i] != b[j]) ++half_transpositions;
    ++j;
  }
  const double m = static_cast<double>(matches);
  const double t = static_cast<double>(half_transpositions) / 2.0;
  return (m / static_cast<double>(a.size()) + m / static_cast<double>(b.size()) + (m - t) / m) / 3.0;
}

double jaro_winkler(std::string_view a, std::string_view b) {
  const double j = jaro(a, b);
  std::size_t prefix = 0;
  while (prefix < 4 && prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix]) ++prefix;
  return j + static_cast<double>(prefix) * 0.1 * (1.0 - j);
}

Eigen::VectorXd name_embedding(std::string_view name) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(kEmbeddingDim);
  if (name.empty()) return v;
  const std::string padded = "#" + lowercase(name) + "#";
  for (std::size_t k = 0; k + 3 <= padded.size(); ++k) {
    v(static_cast<Eigen::Index>(fnv1a(std::string_view(padded).substr(k, 3)) % kEmbeddingDim)) += 1.0;
  }
  const double norm = v.norm();
  if (norm > 0.0) v /= norm;
  return v;
}

PairFeatures name_features(std::string_view a_raw, std::string_view b_raw) {
  // Canonical order keeps every feature symmetric.
  std::string a = lowercase(a_raw);
  std::string b = lowercase(b_raw);
  if (b < a) std::swap(a, b);

  PairFeatures f;
  const auto ta = name_tokens(a);
  const auto tb = name_tokens(b);
  const std::set<std::string> sa(ta.begin(), ta.end());
  const std::set<std::string> sb(tb.begin(), tb.end());
  std::size_t common = 0;
  for (const auto& t : sa) common += sb.count(t);
  const std::size_t uni = sa.size() + sb.size() - common;
  const std::size_t smaller = std::min(sa.size(), sb.size());
  f.name_containment = smaller == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(smaller);
  f.name_jaccard = uni == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(uni);
  const std::size_t longest = std::max(a.size(), b.size());
  f.edit_distance_ratio =
      longest == 0 ? 0.0 : static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
  f.jaro_winkler = jaro_winkler(a, b);
  f.embedding_cosine = name_embedding(a).dot(name_embedding(b));
  return f;
}

PairFeatures compute_pair_features(const ColumnMeta& a, const ColumnMeta& b) {
  PairFeatures f = name_features(a.qualified_name(), b.qualified_name());
  f.type_match = a.type == b.type;
  if (a.distinct_count && b.distinct_count) {
    const auto lo = static_cast<double>(std::min(*a.distinct_count, *b.distinct_count));
    const auto hi = static_cast<double>(std::max(*a.distinct_count, *b.distinct_count));
    f.cardinality_ratio = (lo + 1.0) / (hi + 1.0);
  }
  f.null_ratio_i = ratio_or_zero(a.null_count, a.row_count);
  f.null_ratio_j = ratio_or_zero(b.null_count, b.row_count);
  return f;
}

double heuristic_score(const PairFeatures& f, const HeuristicWeights& weights) {
  const double score = weights.name * std::max(f.name_containment, f.name_jaccard) +
                       weights.jaro_winkler * f.jaro_winkler +
                       weights.embedding * std::max(f.embedding_cosine, 0.0);
  return std::clamp(score, 0.0, 1.0);
}

ScoreMap heuristic_scores(std::span<const ColumnMeta> columns,
                          std::span<const CandidatePair> candidates, const HeuristicWeights& weights) {
  ScoreMap scores;
  for (const auto& c : candidates) {
    const auto& a = columns[static_cast<std::size_t>(c.i)];
    const auto& b = columns[static_cast<std::size_t>(c.j)];
    scores[make_pair_key(c.i, c.j)] = heuristic_score(compute_pair_features(a, b), weights);
  }
  return scores;
}

std::string score_key(const ColumnIndex& index, ColumnId a, ColumnId b) {
  std::string left = index.at(a).qualified_name();
  std::string right = index.at(b).qualified_name();
  if (right < left) std::swap(left, right);
  return left + "|" + right;
}

ScoreFileLoad parse_score_file_json(std::string_view text, const ColumnIndex& index,
                                    std::span<const CandidatePair> candidates) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("score file: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("score file must be a JSON object");

  std::set<PairKey> wanted;
  for (const auto& c : candidates) wanted.insert(make_pair_key(c.i, c.j));

  ScoreFileLoad load;
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_number()) throw FormatError("score file: value for " + key + " is not a number");
    const double score = value.get<double>();
    if (!(score >= 0.0 && score <= 1.0)) {
      throw RangeError("score file: " + key + " has score " + std::to_string(score) + " outside [0,1]");
    }
    const auto bar = key.find('|');
    const auto a = bar == std::string::npos ? std::nullopt : index.find(std::string_view(key).substr(0, bar));
    const auto b = bar == std::string::npos ? std::nullopt : index.find(std::string_view(key).substr(bar + 1));
    if (!a || !b || *a == *b) {
      load.warnings.push_back("score file: unknown key " + key);
      continue;
    }
    const PairKey pair = make_pair_key(*a, *b);
    if (!wanted.contains(pair)) {
      load.warnings.push_back("score file: " + key + " is not a join candidate");
      continue;
    }
    load.scores[pair] = score;
  }
  for (const auto& pair : wanted) {
    if (load.scores.emplace(pair, kDefaultFileScore).second) ++load.defaulted;
  }
  return load;
}

ScoreFileLoad load_score_file(const std::filesystem::path& path, const ColumnIndex& index,
                              std::span<const CandidatePair> candidates) {
  return parse_score_file_json(read_text_file(path), index, candidates);
}

double ConfidenceMapping::probability(ConfidenceLevel level) const {
  switch (level) {
    case ConfidenceLevel::Low: return low;
    case ConfidenceLevel::Medium: return medium;
    case ConfidenceLevel::High: return high;
  }
  return low;
}

double ConfidenceMapping::score(const JoinPrediction& prediction) const {
  const double p = probability(prediction.level);
  return prediction.joinable ? p : 1.0 - p;
}

std::map<PairKey, LlmScore> llm_score_batch(std::span<const CandidatePair> candidates,
                                            const ColumnIndex& index, SemanticOracle& oracle,
                                            const LlmScoringOptions& options) {
  std::vector<PairKey> keys;
  std::vector<PairQuery> queries;
  for (const auto& c : candidates) {
    const PairKey key = make_pair_key(c.i, c.j);
    keys.push_back(key);
    const auto& a = index.at(key.first);
    const auto& b = index.at(key.second);
    queries.push_back({{a.table, a.column}, {b.table, b.column}});
  }

  std::vector<std::string> failures;
  const auto replies = run_batches(
      queries.size(), options.batch_size, options.max_in_flight,
      [&](std::size_t first, std::size_t count) {
        auto reply = oracle.predict_joins(std::span<const PairQuery>(queries).subspan(first, count));
        if (reply.size() != count) {
          throw ProtocolError("oracle returned " + std::to_string(reply.size()) + " predictions for " +
                              std::to_string(count) + " pairs");
        }
        return reply;
      },
      &failures);

  std::map<PairKey, LlmScore> scores;
  for (std::size_t b = 0; b < replies.size(); ++b) {
    if (!replies[b]) {
      const std::size_t first = b * options.batch_size;
      throw OracleError("candidate scoring failed: " + failures.front(), b,
                        std::min(options.batch_size, queries.size() - first));
    }
    for (std::size_t k = 0; k < replies[b]->size(); ++k) {
      const JoinPrediction& p = (*replies[b])[k];
      scores[keys[b * options.batch_size + k]] = LlmScore{p, options.mapping.score(p)};
    }
  }
  return scores;
}

ScoreMap to_score_map(const std::map<PairKey, LlmScore>& scores) {
  ScoreMap out;
  for (const auto& [key, s] : scores) out[key] = s.score;
  return out;
}

ProbabilityMatrix fill_probability_matrix(const ProbabilityMatrix& skeleton, const ScoreMap& scores) {
  ProbabilityMatrix s = skeleton;
  const ColumnId n = s.size();
  for (const auto& [key, score] : scores) {
    const auto [i, j] = key;
    if (i < 0 || j < 0 || i >= n || j >= n || i == j) {
      throw MaskViolation("score for invalid position (" + std::to_string(i) + "," + std::to_string(j) + ")");
    }
    if (s.mask.observed(i, j)) {
      throw MaskViolation("score supplied for observed position (" + std::to_string(i) + "," +
                          std::to_string(j) + ")");
    }
    if (!(score >= 0.0 && score <= 1.0)) throw RangeError("score outside [0,1]");
    s.values(i, j) = score;
    s.values(j, i) = score;
  }
  for (const auto& [i, j] : s.mask.latent_pairs()) {
    if (!scores.contains({i, j})) {
      throw IncompleteScores("no score for candidate (" + std::to_string(i) + "," + std::to_string(j) + ")");
    }
  }
  return s;
}

}  // namespace joingraph
