#include "joingraph/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

namespace joingraph {

namespace {

const char* const kTableWords[] = {
    "customer", "orders",   "product",  "supplier", "region",   "nation",    "employee", "store",
    "invoice",  "payment",  "shipment", "category", "account",  "branch",    "warehouse", "vendor",
    "contract", "project",  "ticket",   "campaign", "device",   "session",   "course",   "student",
    "teacher",  "room",     "booking",  "flight",   "airport",  "airline",   "patient",  "doctor",
    "visit",    "drug",     "claim",    "policy",   "agent",    "property",  "lease",    "tenant",
    "author",   "book",     "review",   "library",  "loan",     "member",    "event",    "venue",
    "artist",   "album",    "track",    "playlist", "team",     "player",    "match",    "league",
};

std::string table_name(int k) {
  constexpr int words = static_cast<int>(std::size(kTableWords));
  std::string name = kTableWords[k % words];
  if (k >= words) name += std::to_string(k / words + 1);
  return name;
}

std::string code_value(char prefix, std::uint64_t v) {
  std::string digits = std::to_string(v);
  return std::string(1, prefix) + std::string(digits.size() < 7 ? 7 - digits.size() : 0, '0') + digits;
}

struct TableDraft {
  std::string name;
  std::uint64_t rows = 0;
  ColumnId pk = 0;
};

}  // namespace

double uniform01(std::mt19937_64& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

std::uint64_t uniform_int(std::mt19937_64& engine, std::uint64_t lo, std::uint64_t hi) {
  if (hi <= lo) return lo;
  return lo + engine() % (hi - lo + 1);
}

SyntheticInstance generate_schema(const SyntheticOptions& o) {
  if (o.tables < 2) throw RangeError("synthetic schema needs at least two tables");
  if (o.min_attributes < 0 || o.max_attributes < o.min_attributes) throw RangeError("bad attribute range");
  if (o.min_rows < 200 || o.max_rows < o.min_rows) throw RangeError("bad row range");
  std::mt19937_64 rng(o.seed);
  SyntheticInstance out;

  std::vector<TableDraft> tables(static_cast<std::size_t>(o.tables));
  for (int k = 0; k < o.tables; ++k) {
    tables[k].name = table_name(k);
    // Log-uniform row counts.
    const double lo = std::log(static_cast<double>(o.min_rows));
    const double hi = std::log(static_cast<double>(o.max_rows));
    tables[k].rows = static_cast<std::uint64_t>(std::exp(lo + (hi - lo) * uniform01(rng)));
  }

  const auto add = [&](ColumnMeta c, std::string entity_type) {
    out.entity_types[c.qualified_name()] = std::move(entity_type);
    out.columns.push_back(std::move(c));
    return static_cast<ColumnId>(out.columns.size() - 1);
  };

  std::vector<std::pair<ColumnId, int>> foreign_keys;  // column, referenced table
  for (int k = 0; k < o.tables; ++k) {
    TableDraft& t = tables[k];
    const std::uint64_t rows = t.rows;
    const std::string key_type = t.name + " id";

    ColumnMeta pk{t.name, uniform01(rng) < 0.5 ? "id" : t.name + "_id", DataType::Integer,
                  rows, rows, 0, "1", std::to_string(rows)};
    t.pk = add(std::move(pk), key_type);

    std::vector<int> refs;
    if (k > 0) refs.push_back(static_cast<int>(uniform_int(rng, 0, static_cast<std::uint64_t>(k - 1))));
    if (uniform01(rng) < o.extra_fk_probability) {
      const int r = static_cast<int>(uniform_int(rng, 0, static_cast<std::uint64_t>(o.tables - 1)));
      if (r != k && std::find(refs.begin(), refs.end(), r) == refs.end()) refs.push_back(r);
    }
    for (int r : refs) {
      const TableDraft& ref = tables[r];
      const std::uint64_t nulls = uniform01(rng) < 0.3 ? uniform_int(rng, 1, rows / 10) : 0;
      const std::uint64_t cap = std::min(ref.rows, rows - nulls - 1);
      const std::uint64_t distinct = uniform_int(rng, std::max<std::uint64_t>(1, cap / 2), cap);
      const std::uint64_t lo = uniform_int(rng, 1, ref.rows - distinct + 1);
      const std::uint64_t hi = uniform_int(rng, lo + distinct - 1, ref.rows);
      const bool synonym = uniform01(rng) < o.synonym_share;
      const std::string suffix = uniform01(rng) < 0.5 ? "_id" : "_key";
      ColumnMeta fk{t.name, ref.name + suffix, DataType::Integer, rows, distinct, nulls,
                    std::to_string(lo), std::to_string(hi)};
      std::string type = ref.name + (synonym ? " reference" : " id");
      if (synonym) out.synonyms.emplace_back(type, ref.name + " id");
      foreign_keys.emplace_back(add(std::move(fk), std::move(type)), r);
    }

    const int attributes = static_cast<int>(uniform_int(rng, static_cast<std::uint64_t>(o.min_attributes),
                                                        static_cast<std::uint64_t>(o.max_attributes)));
    for (int a = 0; a < attributes; ++a) {
      const std::uint64_t kind = uniform_int(rng, 0, 5);
      ColumnMeta c{t.name, "", DataType::Integer, rows, 0, 0, std::nullopt, std::nullopt};
      switch (kind) {
        case 0: {  // small integer domain
          const std::uint64_t d = uniform_int(rng, 2, 100);
          c.column_name = "quantity";
          c.distinct_count = d;
          c.min_value = "1";
          c.max_value = std::to_string(d);
          break;
        }
        case 1: {  // unique business code
          c.column_name = "code";
          c.type = DataType::Varchar;
          c.distinct_count = rows;
          const char prefix = static_cast<char>('A' + uniform_int(rng, 0, 3));
          c.min_value = code_value(prefix, uniform_int(rng, 0, 1000));
          c.max_value = code_value(static_cast<char>(prefix + uniform_int(rng, 0, 3)), uniform_int(rng, 5000000, 9999999));
          break;
        }
        case 2:
          c.column_name = "name";
          c.type = DataType::Varchar;
          c.distinct_count = uniform_int(rng, rows / 4, rows - 1);
          c.min_value = "Aaron";
          c.max_value = "Zoe";
          break;
        case 3:
          c.column_name = "created";
          c.type = DataType::Date;
          c.distinct_count = std::min<std::uint64_t>(rows - 1, 3000);
          c.min_value = "2015-01-01";
          c.max_value = "2023-12-31";
          break;
        case 4:
          c.column_name = "amount";
          c.type = DataType::Double;
          c.distinct_count = rows / 2;
          c.min_value = "0.5";
          c.max_value = "9999.5";
          break;
        default:
          c.column_name = "active";
          c.type = DataType::Boolean;
          c.distinct_count = 2;
          break;
      }
      c.column_name += "_" + std::to_string(a);
      std::string type = t.name + " " + c.column_name;
      add(std::move(c), std::move(type));
    }
  }

  for (const auto& [fk, r] : foreign_keys) out.truth.edges.push_back(make_pair_key(fk, tables[r].pk));
  std::sort(out.truth.edges.begin(), out.truth.edges.end());
  return out;
}

MockOracle truthful_oracle(const SyntheticInstance& instance) {
  return MockOracle(instance.entity_types, instance.synonyms);
}

std::string oracle_fixture_json(const SyntheticInstance& instance,
                                const std::map<PairKey, JoinPrediction>& predictions) {
  nlohmann::ordered_json j;
  j["annotations"] = nlohmann::ordered_json::object();
  for (const auto& [name, type] : instance.entity_types) j["annotations"][name] = type;
  j["synonyms"] = nlohmann::ordered_json::array();
  for (const auto& [a, b] : instance.synonyms) j["synonyms"].push_back({a, b});
  if (!predictions.empty()) {
    j["predictions"] = nlohmann::ordered_json::object();
    for (const auto& [key, p] : predictions) {
      const std::string k = instance.columns[static_cast<std::size_t>(key.first)].qualified_name() + "|" +
                            instance.columns[static_cast<std::size_t>(key.second)].qualified_name();
      j["predictions"][k] = {{"joinable", p.joinable}, {"confidence", std::string(to_string(p.level))}};
    }
  }
  return j.dump(2) + "\n";
}

std::map<PairKey, JoinPrediction> noisy_predictions(const GroundTruth& truth,
                                                    std::span<const CandidatePair> candidates,
                                                    const PriorNoise& noise) {
  std::mt19937_64 rng(noise.seed);
  std::map<PairKey, JoinPrediction> out;
  for (const auto& c : candidates) {
    const PairKey key = make_pair_key(c.i, c.j);
    const bool flip = uniform01(rng) < noise.flip_probability;
    const bool high = uniform01(rng) < (flip ? noise.high_share_wrong : noise.high_share_correct);
    out[key] = JoinPrediction{truth.contains(key.first, key.second) != flip,
                              high ? ConfidenceLevel::High : ConfidenceLevel::Medium};
  }
  return out;
}

ScoreMap prediction_scores(const std::map<PairKey, JoinPrediction>& predictions, const ConfidenceMapping& mapping) {
  ScoreMap out;
  for (const auto& [key, p] : predictions) out[key] = mapping.score(p);
  return out;
}

PlantedInstance planted_biclique(ColumnId n, ColumnId left, ColumnId right, double observed_fraction,
                                 std::uint64_t seed) {
  if (left < 1 || right < 1 || left + right > n) throw RangeError("biclique does not fit in n columns");
  if (!(observed_fraction >= 0.0 && observed_fraction <= 1.0)) throw RangeError("observed_fraction outside [0,1]");
  PlantedInstance out;
  out.a.adjacency = Matrix::Zero(n, n);
  for (ColumnId i = 0; i < left; ++i) {
    for (ColumnId j = left; j < left + right; ++j) {
      out.a.adjacency(i, j) = 1.0;
      out.a.adjacency(j, i) = 1.0;
    }
  }
  out.s.values = out.a.adjacency;
  out.s.mask = ObservedMask(n);
  std::mt19937_64 rng(seed);
  for (ColumnId i = 0; i < n; ++i) {
    for (ColumnId j = i + 1; j < n; ++j) {
      if (uniform01(rng) < observed_fraction) out.s.mask.observe(i, j);
    }
  }
  return out;
}

ProbabilityMatrix random_completion_instance(ColumnId n, double observed_fraction, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ProbabilityMatrix s{Matrix::Zero(n, n), ObservedMask(n)};
  for (ColumnId i = 0; i < n; ++i) {
    for (ColumnId j = i + 1; j < n; ++j) {
      double v = uniform01(rng);
      if (uniform01(rng) < observed_fraction) {
        s.mask.observe(i, j);
        v = v < 0.3 ? 1.0 : 0.0;
      }
      s.values(i, j) = v;
      s.values(j, i) = v;
    }
  }
  return s;
}

}  // namespace joingraph
