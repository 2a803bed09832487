#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "vexa/detector.hpp"

namespace vexa {

enum class Baseline { PadEmbedding };

struct AttributionConfig {
  std::size_t n_samples = 64;
  Baseline baseline = Baseline::PadEmbedding;
  double noise_std = 0.01;
  std::uint64_t seed = 0;
};

struct SubwordAttribution {
  std::vector<double> scores;  // one signed score per piece position
};

struct WordAttribution {
  std::map<std::size_t, double> scores;  // word position -> signed score
  std::vector<std::string> words;
};

struct EvidencePhrase {
  std::string word;
  double score = 0.0;
};

struct EvidenceSet {
  std::vector<EvidencePhrase> phrases;  // descending by score
  std::size_t k = 0;
};

inline constexpr std::size_t kDefaultEvidenceK = 8;

// The all-PAD sequence with one row per input piece.
Matrix baseline_embeddings(const DetectorModel& model, std::size_t pieces);

// Expected gradients against the PAD baseline: for each sample draw
// alpha ~ U(0, 1) and Gaussian jitter, take the logit gradient at
// B + alpha (X - B) + noise, and average (X - B) * gradient. Each piece score
// sums its d coordinates.
SubwordAttribution gradient_shap(const DetectorModel& model, const TokenizedInput& input,
                                 const AttributionConfig& config);

WordAttribution aggregate_to_words(const SubwordAttribution& sub, const TokenizedInput& input);

// Drops channel markers and stopwords (unless the word is a URL, currency or
// emphatic-punctuation token), de-duplicates case-insensitively and keeps the
// top k by signed score, earlier position first on ties.
EvidenceSet filter_evidence(const WordAttribution& words,
                            const std::unordered_set<std::string>& stopwords, std::size_t k);

nlohmann::ordered_json evidence_to_json(const std::string& message_id, const EvidenceSet& evidence,
                                        std::uint64_t seed);
EvidenceSet evidence_from_json(const nlohmann::json& row);

}  // namespace vexa
