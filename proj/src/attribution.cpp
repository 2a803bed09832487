#include "vexa/attribution.hpp"

#include <algorithm>
#include <cmath>

#include "vexa/rng.hpp"
#include "vexa/text.hpp"

namespace vexa {

Matrix baseline_embeddings(const DetectorModel& model, std::size_t pieces) {
  Matrix b(pieces, model.dim());
  const auto pad = model.params().embedding.row(Vocab::kPad);
  for (std::size_t i = 0; i < pieces; ++i) std::ranges::copy(pad, b.row(i).begin());
  return b;
}

SubwordAttribution gradient_shap(const DetectorModel& model, const TokenizedInput& input,
                                 const AttributionConfig& config) {
  if (!model.frozen()) throw Error(ErrorCode::ModelNotFrozen, "attribution requires a frozen detector");
  if (config.n_samples == 0) throw Error(ErrorCode::ZeroSamples, "n_samples must be >= 1");
  if (config.noise_std < 0.0) throw Error(ErrorCode::InvalidArgument, "noise_std must be >= 0");

  const Matrix x = embed(model, input);
  const Matrix b = baseline_embeddings(model, x.rows());
  const std::size_t n = x.rows(), d = x.cols();

  Matrix diff(n, d);
  for (std::size_t i = 0; i < diff.data().size(); ++i) diff.data()[i] = x.data()[i] - b.data()[i];

  Rng rng(config.seed);
  Matrix point(n, d);
  std::vector<double> acc(n * d, 0.0);
  for (std::size_t s = 0; s < config.n_samples; ++s) {
    const double alpha = rng.uniform_open();
    for (std::size_t i = 0; i < point.data().size(); ++i) {
      double v = b.data()[i] + alpha * diff.data()[i];
      if (config.noise_std > 0.0) v += rng.normal(0.0, config.noise_std);
      point.data()[i] = v;
    }
    const Matrix g = grad_wrt_embeddings(model, point);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += diff.data()[i] * g.data()[i];
  }

  SubwordAttribution out;
  out.scores.assign(n, 0.0);
  const double inv = 1.0 / static_cast<double>(config.n_samples);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t k = 0; k < d; ++k) sum += acc[i * d + k];
    out.scores[i] = sum * inv;
  }
  return out;
}

WordAttribution aggregate_to_words(const SubwordAttribution& sub, const TokenizedInput& input) {
  if (sub.scores.size() != input.alignment.size() ||
      input.alignment.size() != input.piece_ids.size()) {
    throw Error(ErrorCode::AlignmentMismatch,
                "attribution has " + std::to_string(sub.scores.size()) + " scores for " +
                    std::to_string(input.alignment.size()) + " aligned pieces");
  }
  WordAttribution out;
  out.words = input.words;
  for (std::size_t i = 0; i < sub.scores.size(); ++i) {
    const std::size_t w = input.alignment[i];
    if (w >= input.words.size()) {
      throw Error(ErrorCode::AlignmentMismatch, "piece aligned to a word past the end");
    }
    out.scores[w] += sub.scores[i];
  }
  return out;
}

EvidenceSet filter_evidence(const WordAttribution& words,
                            const std::unordered_set<std::string>& stopwords, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "evidence k must be >= 1");

  struct Candidate {
    std::string word;
    std::string key;
    double score;
    std::size_t position;
  };
  std::vector<Candidate> candidates;
  for (const auto& [pos, score] : words.scores) {
    if (pos >= words.words.size()) {
      throw Error(ErrorCode::AlignmentMismatch, "word score refers to a missing word");
    }
    const std::string& raw = words.words[pos];
    if (channel_from_marker(raw)) continue;
    const bool risk = text::is_risk_token(raw);
    std::string cleaned = text::strip_punctuation(raw);
    if (cleaned.empty() || (!risk && !text::has_letter_or_digit(cleaned))) continue;
    std::string key = text::ascii_lower(cleaned);
    if (!risk && stopwords.contains(key)) continue;
    candidates.push_back({std::move(cleaned), std::move(key), score, pos});
  }

  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.position < b.position;
  });

  EvidenceSet out;
  out.k = k;
  std::unordered_set<std::string> seen;
  for (auto& c : candidates) {
    if (out.phrases.size() == k) break;
    if (!seen.insert(c.key).second) continue;
    out.phrases.push_back({std::move(c.word), c.score});
  }
  return out;
}

nlohmann::ordered_json evidence_to_json(const std::string& message_id, const EvidenceSet& evidence,
                                        std::uint64_t seed) {
  nlohmann::ordered_json phrases = nlohmann::ordered_json::array();
  for (const auto& p : evidence.phrases) phrases.push_back({{"word", p.word}, {"score", p.score}});
  return {{"id", message_id}, {"phrases", phrases}, {"k", evidence.k}, {"seed", seed}};
}

EvidenceSet evidence_from_json(const nlohmann::json& row) {
  EvidenceSet e;
  e.k = row.at("k").get<std::size_t>();
  for (const auto& p : row.at("phrases")) {
    e.phrases.push_back({p.at("word").get<std::string>(), p.at("score").get<double>()});
  }
  return e;
}

}  // namespace vexa
