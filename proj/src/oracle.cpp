#include "joingraph/oracle.hpp"

#include <cctype>
#include <cstdlib>
#include <thread>

#include "joingraph/ingestion.hpp"

// After Eigen: <resolv.h>, pulled in by httplib, defines a `_res` macro
// that collides with Eigen parameter names.
#include <httplib.h>
#include <json.hpp>

namespace joingraph {

namespace {

using nlohmann::json;

std::string qualified(const std::string& table, const std::string& column) {
  return table + "." + column;
}

std::pair<std::string, std::string> ordered_pair(std::string a, std::string b) {
  if (b < a) std::swap(a, b);
  return {std::move(a), std::move(b)};
}

json parse_reply(const std::string& body, const char* field) {
  json reply;
  try {
    reply = json::parse(body);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("oracle reply is not JSON: ") + e.what());
  }
  if (!reply.is_object() || !reply.contains(field) || !reply[field].is_array()) {
    throw ProtocolError(std::string("oracle reply lacks array \"") + field + "\"");
  }
  return reply[field];
}

void expect_size(const json& items, std::size_t expected, const char* field) {
  if (items.size() != expected) {
    throw ProtocolError(std::string("oracle returned ") + std::to_string(items.size()) + " " +
                        field + " for " + std::to_string(expected) + " inputs");
  }
}

}  // namespace

std::string_view to_string(ConfidenceLevel level) {
  switch (level) {
    case ConfidenceLevel::Low: return "low";
    case ConfidenceLevel::Medium: return "medium";
    case ConfidenceLevel::High: return "high";
  }
  return "low";
}

std::optional<ConfidenceLevel> parse_confidence(std::string_view text) {
  const std::string norm = normalize_entity_type(text);
  if (norm == "low") return ConfidenceLevel::Low;
  if (norm == "medium") return ConfidenceLevel::Medium;
  if (norm == "high") return ConfidenceLevel::High;
  return std::nullopt;
}

std::string normalize_entity_type(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

// ---- MockOracle -----------------------------------------------------------

MockOracle::MockOracle(std::map<std::string, std::string> annotations,
                       std::vector<std::pair<std::string, std::string>> synonyms)
    : annotations_(std::move(annotations)) {
  for (auto& [a, b] : synonyms) add_synonym(a, b);
}

MockOracle MockOracle::from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("mock oracle fixture: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("mock oracle fixture must be a JSON object");
  MockOracle oracle;
  if (auto it = doc.find("annotations"); it != doc.end()) {
    if (!it->is_object()) throw FormatError("mock oracle: \"annotations\" must be an object");
    for (const auto& [key, value] : it->items()) {
      if (!value.is_string()) throw FormatError("mock oracle: annotation for " + key + " must be a string");
      oracle.set_annotation(key, value.get<std::string>());
    }
  }
  if (auto it = doc.find("synonyms"); it != doc.end()) {
    if (!it->is_array()) throw FormatError("mock oracle: \"synonyms\" must be an array");
    for (const auto& entry : *it) {
      if (!entry.is_array() || entry.size() != 2 || !entry[0].is_string() || !entry[1].is_string()) {
        throw FormatError("mock oracle: synonym entries must be [str, str]");
      }
      oracle.add_synonym(entry[0].get<std::string>(), entry[1].get<std::string>());
    }
  }
  if (auto it = doc.find("predictions"); it != doc.end()) {
    if (!it->is_object()) throw FormatError("mock oracle: \"predictions\" must be an object");
    for (const auto& [key, value] : it->items()) {
      const auto bar = key.find('|');
      if (bar == std::string::npos) throw FormatError("mock oracle: prediction key " + key + " lacks '|'");
      const auto level = parse_confidence(value.value("confidence", ""));
      if (!level || !value.contains("joinable") || !value["joinable"].is_boolean()) {
        throw FormatError("mock oracle: malformed prediction for " + key);
      }
      oracle.set_prediction(key.substr(0, bar), key.substr(bar + 1),
                            JoinPrediction{value["joinable"].get<bool>(), *level});
    }
  }
  return oracle;
}

MockOracle MockOracle::from_file(const std::filesystem::path& path) {
  return from_json(read_text_file(path));
}

void MockOracle::set_annotation(const std::string& qualified_name, std::string entity_type) {
  annotations_[qualified_name] = std::move(entity_type);
}

void MockOracle::add_synonym(const std::string& a, const std::string& b) {
  synonyms_.insert(ordered_pair(normalize_entity_type(a), normalize_entity_type(b)));
}

void MockOracle::set_prediction(const std::string& a, const std::string& b, JoinPrediction prediction) {
  predictions_[ordered_pair(a, b)] = prediction;
}

void MockOracle::reset_counters() {
  counters_->annotate_requests = 0;
  counters_->annotated_columns = 0;
  counters_->match_requests = 0;
  counters_->matched_pairs = 0;
  counters_->predict_requests = 0;
}

bool MockOracle::synonymous(const std::string& a, const std::string& b) const {
  const std::string na = normalize_entity_type(a);
  const std::string nb = normalize_entity_type(b);
  if (na.empty() || nb.empty()) return false;
  return na == nb || synonyms_.contains(ordered_pair(na, nb));
}

std::vector<std::string> MockOracle::annotate(std::span<const ColumnContext> columns) {
  if (unavailable_) throw OracleError("mock oracle unavailable", 0, columns.size());
  ++counters_->annotate_requests;
  counters_->annotated_columns += columns.size();
  std::vector<std::string> types;
  types.reserve(columns.size());
  for (const auto& column : columns) {
    auto it = annotations_.find(qualified(column.table, column.column));
    types.push_back(it == annotations_.end() ? std::string() : it->second);
  }
  return types;
}

std::vector<bool> MockOracle::soft_match(std::span<const TypeMatchQuery> pairs) {
  if (unavailable_) throw OracleError("mock oracle unavailable", 0, pairs.size());
  ++counters_->match_requests;
  counters_->matched_pairs += pairs.size();
  std::vector<bool> matches;
  matches.reserve(pairs.size());
  for (const auto& query : pairs) matches.push_back(synonymous(query.a.entity_type, query.b.entity_type));
  return matches;
}

std::vector<JoinPrediction> MockOracle::predict_joins(std::span<const PairQuery> pairs) {
  if (unavailable_) throw OracleError("mock oracle unavailable", 0, pairs.size());
  ++counters_->predict_requests;
  std::vector<JoinPrediction> out;
  out.reserve(pairs.size());
  for (const auto& query : pairs) {
    const std::string a = qualified(query.a.table, query.a.column);
    const std::string b = qualified(query.b.table, query.b.column);
    if (auto it = predictions_.find(ordered_pair(a, b)); it != predictions_.end()) {
      out.push_back(it->second);
      continue;
    }
    const auto ta = annotations_.find(a);
    const auto tb = annotations_.find(b);
    const bool agree = ta != annotations_.end() && tb != annotations_.end() &&
                       synonymous(ta->second, tb->second);
    out.push_back(JoinPrediction{agree, ConfidenceLevel::High});
  }
  return out;
}

// ---- HttpOracle -----------------------------------------------------------

HttpOracle::HttpOracle(Options options) : options_(std::move(options)) {
  const auto scheme = options_.url.find("://");
  if (scheme == std::string::npos) throw RangeError("oracle URL must include a scheme: " + options_.url);
  const auto path = options_.url.find('/', scheme + 3);
  scheme_host_port_ = options_.url.substr(0, path);
  if (path != std::string::npos) path_prefix_ = options_.url.substr(path);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  if (options_.attempts < 1) options_.attempts = 1;
}

HttpOracle HttpOracle::from_environment(std::string url, std::string prompt_template) {
  Options options;
  options.url = std::move(url);
  options.prompt_template = std::move(prompt_template);
  if (const char* token = std::getenv("JOINGRAPH_ORACLE_TOKEN")) options.bearer_token = token;
  return HttpOracle(std::move(options));
}

std::string HttpOracle::render_prompt(const std::string& tmpl, std::string_view task,
                                      std::string_view items) {
  std::string out = tmpl;
  const auto replace_all = [&out](std::string_view key, std::string_view value) {
    for (auto pos = out.find(key); pos != std::string::npos; pos = out.find(key, pos + value.size())) {
      out.replace(pos, key.size(), value);
    }
  };
  replace_all("{{task}}", task);
  replace_all("{{items}}", items);
  return out;
}

std::string HttpOracle::post(const std::string& endpoint, const std::string& body) const {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(options_.timeout);
  client.set_read_timeout(options_.timeout);
  client.set_write_timeout(options_.timeout);
  httplib::Headers headers;
  if (!options_.bearer_token.empty()) {
    headers.emplace("Authorization", "Bearer " + options_.bearer_token);
  }
  std::string last_error;
  auto backoff = options_.initial_backoff;
  for (int attempt = 0; attempt < options_.attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    auto result = client.Post(path_prefix_ + endpoint, headers, body, "application/json");
    if (!result) {
      last_error = httplib::to_string(result.error());
      continue;
    }
    if (result->status >= 200 && result->status < 300) return result->body;
    last_error = "HTTP " + std::to_string(result->status);
    // Client errors will not improve on retry.
    if (result->status >= 400 && result->status < 500 && result->status != 429) break;
  }
  throw OracleError("oracle request " + endpoint + " failed: " + last_error);
}

std::vector<std::string> HttpOracle::annotate(std::span<const ColumnContext> columns) {
  json request;
  request["columns"] = json::array();
  for (const auto& c : columns) request["columns"].push_back({{"table", c.table}, {"column", c.column}});
  if (!options_.prompt_template.empty()) {
    request["prompt"] = render_prompt(options_.prompt_template, "annotate", request["columns"].dump());
  }
  const json items = parse_reply(post("/annotate", request.dump()), "entity_types");
  expect_size(items, columns.size(), "entity types");
  std::vector<std::string> types;
  types.reserve(items.size());
  for (const auto& item : items) types.push_back(item.is_string() ? item.get<std::string>() : std::string());
  return types;
}

std::vector<bool> HttpOracle::soft_match(std::span<const TypeMatchQuery> pairs) {
  json request;
  request["pairs"] = json::array();
  const auto side = [](const TypedColumn& c) {
    return json{{"table", c.table}, {"column", c.column}, {"entity_type", c.entity_type}};
  };
  for (const auto& p : pairs) request["pairs"].push_back({{"a", side(p.a)}, {"b", side(p.b)}});
  if (!options_.prompt_template.empty()) {
    request["prompt"] = render_prompt(options_.prompt_template, "match", request["pairs"].dump());
  }
  const json items = parse_reply(post("/match", request.dump()), "matches");
  expect_size(items, pairs.size(), "matches");
  std::vector<bool> matches;
  matches.reserve(items.size());
  for (const auto& item : items) {
    if (!item.is_boolean()) throw ProtocolError("oracle match result must be boolean");
    matches.push_back(item.get<bool>());
  }
  return matches;
}

std::vector<JoinPrediction> HttpOracle::predict_joins(std::span<const PairQuery> pairs) {
  json request;
  request["pairs"] = json::array();
  const auto side = [](const ColumnContext& c) { return json{{"table", c.table}, {"column", c.column}}; };
  for (const auto& p : pairs) request["pairs"].push_back({{"a", side(p.a)}, {"b", side(p.b)}});
  if (!options_.prompt_template.empty()) {
    request["prompt"] = render_prompt(options_.prompt_template, "predict", request["pairs"].dump());
  }
  const json items = parse_reply(post("/predict", request.dump()), "predictions");
  expect_size(items, pairs.size(), "predictions");
  std::vector<JoinPrediction> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    if (!item.is_object() || !item.contains("joinable") || !item["joinable"].is_boolean() ||
        !item.contains("confidence") || !item["confidence"].is_string()) {
      throw ProtocolError("malformed prediction in oracle reply");
    }
    const auto level = parse_confidence(item["confidence"].get<std::string>());
    if (!level) throw ProtocolError("unknown confidence level " + item["confidence"].get<std::string>());
    out.push_back(JoinPrediction{item["joinable"].get<bool>(), *level});
  }
  return out;
}

}  // namespace joingraph
