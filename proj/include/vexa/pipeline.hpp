#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vexa/attribution.hpp"
#include "vexa/corpus.hpp"
#include "vexa/detector.hpp"
#include "vexa/evaluation.hpp"
#include "vexa/generation.hpp"

namespace vexa {

struct CorpusSource {
  std::filesystem::path path;
  std::optional<Channel> channel;  // set: raw records of one channel; unset: rows carry `channel`
  std::string source;               // default provenance for raw records
};

struct SyntheticSource {
  std::uint64_t seed = 7;
  std::size_t per_stratum = 100;
};

struct RunConfig {
  std::vector<CorpusSource> corpus;
  std::optional<SyntheticSource> synthetic;  // used when corpus is empty
  std::filesystem::path model_path;          // empty: <run dir>/model.json
  bool train = false;
  std::uint64_t seed = 7;
  TrainConfig detector;
  AttributionConfig attribution;
  std::size_t evidence_k = kDefaultEvidenceK;
  EvaluationConfig evaluation;
  LlmClientConfig llm;
  bool nli_mock = true;
  NliClientConfig nli;
  bool mock = false;
  std::vector<Condition> conditions{std::begin(kAllConditions), std::end(kAllConditions)};
  double sample_fraction = 0.10;
  std::size_t explanation_token_cap = kExplanationTokenCap;
  std::filesystem::path output_dir = "runs";

  // Raw document as read, before ${VAR} interpolation; recorded in the manifest.
  nlohmann::json source_document = nlohmann::json::object();
};

// Replaces every ${NAME} in string values with the environment variable;
// unset variables are a ConfigError.
nlohmann::json interpolate_env(const nlohmann::json& doc);

RunConfig run_config_from_json(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

// Seeds of the stochastic stages, all derived from RunConfig::seed.
struct StageSeeds {
  std::uint64_t split = 0;
  std::uint64_t sample = 0;
  std::uint64_t attribution = 0;
};
StageSeeds derive_seeds(std::uint64_t seed);

// Per-message attribution seed: independent of processing order.
std::uint64_t message_seed(std::uint64_t attribution_seed, std::string_view message_id);

std::uint64_t fnv1a64(std::string_view bytes);

enum class Stage { Ingest, Train, Predict, Sample, Attribute, Explain, Evaluate };
std::string_view stage_name(Stage s);

struct RunResult {
  std::filesystem::path run_dir;
  std::optional<MetricReport> report;
  std::size_t explained_messages = 0;
  std::size_t skipped_empty_evidence = 0;
};

// Runs the stages up to and including `last` into a fresh run directory
// under config.output_dir. Errors are rethrown as vexa::Error with the
// failing stage recorded.
RunResult run_pipeline(const RunConfig& config, Stage last = Stage::Evaluate);

// Creates <root>/run-<UTC timestamp>[-N]; never reuses an existing directory.
std::filesystem::path make_run_dir(const std::filesystem::path& root);

// Re-aggregates a scores.jsonl file.
MetricReport report_from_scores(const std::filesystem::path& scores_path,
                                const std::vector<Condition>& conditions);

struct ExplainOneRequest {
  std::string text;
  Channel channel = Channel::SMS;
  std::optional<std::string> subject;
  std::optional<Vulnerability> persona;  // none: XaiOnly
};

struct ExplainOneResult {
  Prediction prediction;
  Condition condition = Condition::XaiOnly;
  EvidenceSet evidence;
  Explanation explanation;
};

ExplainOneResult explain_one(const RunConfig& config, const ExplainOneRequest& request);
void print_explain_one(std::ostream& out, const ExplainOneResult& result);

}  // namespace vexa
