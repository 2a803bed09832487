#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <set>

#include "vexa/error.hpp"
#include "vexa/pipeline.hpp"

namespace vexa {

namespace {

std::string interpolate_string(const std::string& s) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto open = s.find("${", i);
    if (open == std::string::npos) {
      out.append(s, i, std::string::npos);
      break;
    }
    const auto close = s.find('}', open + 2);
    if (close == std::string::npos) {
      throw Error(ErrorCode::ConfigError, "unterminated ${ in '" + s + "'");
    }
    out.append(s, i, open - i);
    const std::string name = s.substr(open + 2, close - open - 2);
    const char* value = std::getenv(name.c_str());
    if (name.empty() || value == nullptr) {
      throw Error(ErrorCode::ConfigError, "environment variable '" + name + "' is not set");
    }
    out += value;
    i = close + 1;
  }
  return out;
}

void check_keys(const nlohmann::json& obj, std::string_view where,
                std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw Error(ErrorCode::ConfigError, std::string(where) + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorCode::ConfigError, "unknown key '" + key + "' in " + std::string(where));
    }
  }
}

template <typename T>
void read(const nlohmann::json& obj, const char* key, T& into) {
  if (!obj.contains(key)) return;
  try {
    into = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("config key '") + key + "': " + e.what());
  }
}

void read_ms(const nlohmann::json& obj, const char* key, std::chrono::milliseconds& into) {
  long long ms = into.count();
  read(obj, key, ms);
  into = std::chrono::milliseconds(ms);
}

void read_http(const nlohmann::json& obj, http::ClientConfig& http) {
  read(obj, "base_url", http.base_url);
  read(obj, "api_key_env", http.api_key_env_var);
  read_ms(obj, "timeout_ms", http.timeout);
  read(obj, "max_retries", http.max_retries);
  read_ms(obj, "backoff_ms", http.initial_backoff);
}

}  // namespace

nlohmann::json interpolate_env(const nlohmann::json& doc) {
  if (doc.is_string()) return interpolate_string(doc.get<std::string>());
  if (doc.is_array() || doc.is_object()) {
    nlohmann::json out = doc;
    for (auto& v : out) v = interpolate_env(v);
    return out;
  }
  return doc;
}

RunConfig run_config_from_json(const nlohmann::json& raw) {
  const nlohmann::json doc = interpolate_env(raw);
  check_keys(doc, "config",
             {"corpus", "synthetic", "model_path", "train", "seed", "detector", "attribution",
              "evaluation", "llm", "nli", "mock", "conditions", "sample_fraction",
              "explanation_token_cap", "output_dir"});
  RunConfig c;
  c.source_document = raw;

  if (doc.contains("corpus")) {
    if (!doc["corpus"].is_array()) throw Error(ErrorCode::ConfigError, "corpus must be a list");
    for (const auto& entry : doc["corpus"]) {
      check_keys(entry, "corpus entry", {"path", "channel", "source"});
      CorpusSource src;
      std::string path;
      read(entry, "path", path);
      if (path.empty()) throw Error(ErrorCode::ConfigError, "corpus entry without path");
      src.path = path;
      if (entry.contains("channel")) src.channel = parse_channel(entry["channel"].get<std::string>());
      read(entry, "source", src.source);
      c.corpus.push_back(std::move(src));
    }
  }
  if (doc.contains("synthetic")) {
    check_keys(doc["synthetic"], "synthetic", {"seed", "per_stratum"});
    SyntheticSource s;
    read(doc["synthetic"], "seed", s.seed);
    read(doc["synthetic"], "per_stratum", s.per_stratum);
    c.synthetic = s;
  }
  if (c.corpus.empty() && !c.synthetic) {
    throw Error(ErrorCode::ConfigError, "config needs a corpus list or a synthetic section");
  }

  std::string model_path;
  read(doc, "model_path", model_path);
  c.model_path = model_path;
  read(doc, "train", c.train);
  read(doc, "seed", c.seed);
  c.detector.seed = c.seed;

  if (doc.contains("detector")) {
    const auto& d = doc["detector"];
    check_keys(d, "detector", {"lr", "epochs", "patience", "embedding_dim", "hidden_dim",
                               "val_fraction", "vocab_size", "token_limit"});
    read(d, "lr", c.detector.lr);
    read(d, "epochs", c.detector.epochs);
    read(d, "patience", c.detector.patience);
    read(d, "embedding_dim", c.detector.d);
    read(d, "hidden_dim", c.detector.h);
    read(d, "val_fraction", c.detector.val_fraction);
    read(d, "vocab_size", c.detector.vocab_size);
    read(d, "token_limit", c.detector.token_limit);
  }
  if (doc.contains("attribution")) {
    const auto& a = doc["attribution"];
    check_keys(a, "attribution", {"n_samples", "noise_std", "k"});
    read(a, "n_samples", c.attribution.n_samples);
    read(a, "noise_std", c.attribution.noise_std);
    read(a, "k", c.evidence_k);
  }
  if (doc.contains("evaluation")) {
    check_keys(doc["evaluation"], "evaluation", {"alpha"});
    read(doc["evaluation"], "alpha", c.evaluation.alpha);
  }
  if (doc.contains("llm")) {
    const auto& l = doc["llm"];
    check_keys(l, "llm", {"base_url", "api_key_env", "model", "temperature", "max_tokens",
                          "timeout_ms", "max_retries", "backoff_ms", "max_in_flight"});
    read_http(l, c.llm.http);
    read(l, "model", c.llm.model_name);
    read(l, "temperature", c.llm.temperature);
    read(l, "max_tokens", c.llm.max_tokens);
    read(l, "max_in_flight", c.llm.max_in_flight);
  }
  if (doc.contains("nli")) {
    const auto& n = doc["nli"];
    check_keys(n, "nli", {"mock", "base_url", "api_key_env", "timeout_ms", "max_retries",
                          "backoff_ms", "max_in_flight"});
    read(n, "mock", c.nli_mock);
    read_http(n, c.nli.http);
    read(n, "max_in_flight", c.nli.max_in_flight);
  }
  read(doc, "mock", c.mock);
  if (doc.contains("conditions")) {
    c.conditions.clear();
    for (const auto& name : doc["conditions"]) c.conditions.push_back(parse_condition(name.get<std::string>()));
  }
  read(doc, "sample_fraction", c.sample_fraction);
  read(doc, "explanation_token_cap", c.explanation_token_cap);
  std::string out_dir = c.output_dir.string();
  read(doc, "output_dir", out_dir);
  c.output_dir = out_dir;

  if (!(c.sample_fraction > 0.0 && c.sample_fraction <= 1.0)) {
    throw Error(ErrorCode::ConfigError, "sample_fraction must be in (0, 1]");
  }
  if (c.conditions.empty()) throw Error(ErrorCode::ConfigError, "no conditions configured");
  std::set<Condition> seen;
  for (Condition cond : c.conditions) {
    if (!seen.insert(cond).second) {
      throw Error(ErrorCode::ConfigError, "condition listed twice: " + std::string(condition_name(cond)));
    }
  }
  if (c.evidence_k == 0) throw Error(ErrorCode::ConfigError, "attribution.k must be > 0");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  RunConfig c = run_config_from_json(doc);
  // Input paths are relative to the config file.
  const auto base = path.parent_path();
  for (auto& src : c.corpus) {
    if (src.path.is_relative()) src.path = base / src.path;
  }
  if (!c.model_path.empty() && c.model_path.is_relative()) c.model_path = base / c.model_path;
  return c;
}

}  // namespace vexa
