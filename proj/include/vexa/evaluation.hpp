#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vexa/attribution.hpp"
#include "vexa/generation.hpp"
#include "vexa/http.hpp"
#include "vexa/text.hpp"

namespace vexa {

inline constexpr std::string_view kNliHypothesis =
    "The explanation identifies cues that support assessing message risk.";

struct EvaluationConfig {
  double alpha = 0.5;
  std::string hypothesis{kNliHypothesis};
  std::string stopwords_version{text::kStopwordsVersion};
  // Flesch-Kincaid coefficients
  double beta = 0.39;
  double gamma = 11.8;
  double epsilon = 15.59;
};

struct NliScores {
  double entailment = 0.0;
  double neutral = 0.0;
  double contradiction = 0.0;
};

// Throws ProbabilitySumViolation unless each value is in [0, 1] and they sum
// to 1 within 1e-6.
void validate(const NliScores& s);

// Lowercases, strips surrounding punctuation and applies suffix rules until
// none matches. URL, currency and emphatic tokens keep their shape.
std::string lemmatize(std::string_view token);

// Lemmas of the non-stopword tokens of a text (risk tokens always kept).
std::set<std::string> content_lemmas(std::string_view text);

double faithfulness(const EvidenceSet& evidence, std::string_view explanation_text);
double faithfulness(const EvidenceSet& evidence, const Explanation& explanation);

class NliScorer {
 public:
  virtual ~NliScorer() = default;
  virtual NliScores score(std::string_view premise, std::string_view hypothesis) = 0;
  virtual std::string name() const = 0;
};

// Counts distinct risk-cue lexicon lemmas in the premise:
// >= 2 -> (0.8, 0.15, 0.05), 1 -> (0.4, 0.4, 0.2), 0 -> (0.1, 0.5, 0.4).
class LexiconNliScorer final : public NliScorer {
 public:
  NliScores score(std::string_view premise, std::string_view hypothesis) override;
  std::string name() const override { return "lexicon-mock"; }
  static const std::set<std::string>& lexicon();
};

struct NliClientConfig {
  http::ClientConfig http{.base_url = "http://127.0.0.1:8090", .api_key_env_var = ""};
  std::size_t max_in_flight = 4;
};

// POST {base_url}/nli {premise, hypothesis} -> {entailment, neutral, contradiction}.
class RemoteNliScorer final : public NliScorer {
 public:
  explicit RemoteNliScorer(NliClientConfig config) : config_(std::move(config)) {}
  NliScores score(std::string_view premise, std::string_view hypothesis) override;
  std::string name() const override { return "remote:" + config_.http.base_url; }
  const NliClientConfig& config() const { return config_; }

 private:
  NliClientConfig config_;
};

NliScores score_nli(NliScorer& scorer, const Explanation& explanation, const EvaluationConfig& config);

double correctness(const NliScores& scores, const EvaluationConfig& config);

std::vector<std::string> split_sentences(std::string_view text);
std::size_t count_syllables(std::string_view word);

struct ReadabilityBreakdown {
  std::size_t words = 0;
  std::size_t sentences = 0;
  std::size_t syllables = 0;
  double sc = 0.0;  // words per sentence
  double ld = 0.0;  // syllables per word
  double fkgl = 0.0;
};

ReadabilityBreakdown fkgl_from_counts(std::size_t words, std::size_t sentences,
                                      std::size_t syllables, const EvaluationConfig& config);
ReadabilityBreakdown fkgl(std::string_view text, const EvaluationConfig& config);

struct MessageScore {
  std::string message_id;
  Condition condition = Condition::PureLLM;
  std::optional<double> faithfulness;  // absent for PureLLM
  NliScores nli;
  double correctness = 0.0;
  ReadabilityBreakdown readability;
};

// Scores one explanation. Faithfulness is computed for evidence conditions
// only; EmptyEvidence propagates.
MessageScore score_explanation(const Explanation& explanation, const EvidenceSet* evidence,
                               NliScorer& scorer, const EvaluationConfig& config);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 when n = 1
};

MeanStd mean_std(const std::vector<double>& xs);

struct ConditionRow {
  Condition condition = Condition::PureLLM;
  std::optional<MeanStd> faithfulness;
  MeanStd correctness;
  MeanStd fkgl;
  std::size_t n = 0;
};

struct MetricReport {
  std::vector<ConditionRow> rows;  // in the order of the requested conditions
};

MetricReport aggregate_report(const std::vector<MessageScore>& scores,
                              const std::vector<Condition>& conditions);

nlohmann::ordered_json to_json(const MessageScore& s);
MessageScore message_score_from_json(const nlohmann::json& row);
nlohmann::ordered_json to_json(const MetricReport& report);
// Aligned plain-text table: Condition | Faithfulness | Correctness | FKGL.
std::string render_table(const MetricReport& report);

}  // namespace vexa
