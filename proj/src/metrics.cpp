#include <algorithm>
#include <cmath>

#include "vexa/evaluation.hpp"
#include "vexa/text.hpp"

namespace vexa {

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// One pass of the ordered suffix rules; returns false when nothing matched.
bool apply_suffix_rule(std::string& w) {
  auto stem_len = [&](std::size_t suffix) { return w.size() - suffix; };
  if (ends_with(w, "ies") && w.size() > 3) {
    w.replace(w.size() - 3, 3, "y");
    return true;
  }
  if (ends_with(w, "sses")) {
    w.erase(w.size() - 2);
    return true;
  }
  if (ends_with(w, "es") && stem_len(2) >= 3) {
    const std::string_view stem = std::string_view(w).substr(0, w.size() - 2);
    if (ends_with(stem, "x") || ends_with(stem, "ch") || ends_with(stem, "sh")) {
      w.erase(w.size() - 2);
      return true;
    }
  }
  if (ends_with(w, "s") && stem_len(1) >= 3 && !ends_with(w, "ss") && !ends_with(w, "us") &&
      !ends_with(w, "is")) {
    w.pop_back();
    return true;
  }
  if (ends_with(w, "ing") && stem_len(3) >= 3) {
    w.erase(w.size() - 3);
    return true;
  }
  if (ends_with(w, "ed") && stem_len(2) >= 3) {
    w.erase(w.size() - 2);
    return true;
  }
  return false;
}

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

}  // namespace

std::string lemmatize(std::string_view token) {
  const std::string lower = text::ascii_lower(token);
  std::string w = text::strip_punctuation(lower);
  if (text::is_risk_token(lower)) return w;
  if (ends_with(w, "'s")) w = text::strip_punctuation(w.substr(0, w.size() - 2));
  while (apply_suffix_rule(w)) {
  }
  return w;
}

std::set<std::string> content_lemmas(std::string_view s) {
  const auto& stop = text::default_stopwords();
  std::set<std::string> out;
  for (const auto& tok : text::split_whitespace(s)) {
    const bool risk = text::is_risk_token(tok);
    const std::string bare = text::strip_punctuation(text::ascii_lower(tok));
    if (bare.empty()) continue;
    if (!risk && (!text::has_letter_or_digit(bare) || stop.contains(bare))) continue;
    out.insert(lemmatize(tok));
  }
  return out;
}

double faithfulness(const EvidenceSet& evidence, std::string_view explanation_text) {
  std::set<std::string> xai;
  for (const auto& p : evidence.phrases) {
    for (const auto& l : content_lemmas(p.word)) xai.insert(l);
  }
  if (xai.empty()) throw Error(ErrorCode::EmptyEvidence, "evidence set has no scorable tokens");
  const auto exp = content_lemmas(explanation_text);
  const auto hits = std::count_if(xai.begin(), xai.end(),
                                  [&](const std::string& l) { return exp.contains(l); });
  return static_cast<double>(hits) / static_cast<double>(xai.size());
}

double faithfulness(const EvidenceSet& evidence, const Explanation& explanation) {
  return faithfulness(evidence, explanation.text);
}

void validate(const NliScores& s) {
  for (double p : {s.entailment, s.neutral, s.contradiction}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::ProbabilitySumViolation, "NLI probability outside [0, 1]");
    }
  }
  const double sum = s.entailment + s.neutral + s.contradiction;
  if (std::abs(sum - 1.0) > 1e-6) {
    throw Error(ErrorCode::ProbabilitySumViolation,
                "NLI probabilities sum to " + std::to_string(sum));
  }
}

double correctness(const NliScores& scores, const EvaluationConfig& config) {
  return scores.entailment + config.alpha * scores.neutral;
}

std::vector<std::string> split_sentences(std::string_view s) {
  if (text::trim(s).empty()) throw Error(ErrorCode::EmptyText, "no text to split");
  std::vector<std::string> out;
  auto flush = [&](std::string_view seg) {
    seg = text::trim(seg);
    if (text::has_letter_or_digit(seg)) out.emplace_back(seg);
  };
  std::size_t start = 0, i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (c == '.' || c == '!' || c == '?') {
      std::size_t j = i;
      while (j < s.size() && (s[j] == '.' || s[j] == '!' || s[j] == '?')) ++j;
      if (j == s.size() || std::isspace(static_cast<unsigned char>(s[j]))) {
        flush(s.substr(start, j - start));
        start = j;
      }
      i = j;
    } else {
      ++i;
    }
  }
  if (start < s.size()) flush(s.substr(start));
  if (out.empty()) throw Error(ErrorCode::EmptyText, "text has no sentence with words");
  return out;
}

std::size_t count_syllables(std::string_view word) {
  const std::string w = text::ascii_lower(word);
  if (!text::has_letter(w)) throw Error(ErrorCode::NoLetters, "'" + std::string(word) + "' has no letters");
  std::size_t count = 0;
  bool in_run = false;
  for (char c : w) {
    const bool v = is_vowel(c);
    if (v && !in_run) ++count;
    in_run = v;
  }
  // trailing punctuation does not hide a silent final 'e'
  std::string letters;
  for (char c : w) {
    if (std::isalpha(static_cast<unsigned char>(c))) letters += c;
  }
  if (count > 1 && ends_with(letters, "e") && !ends_with(letters, "le")) --count;
  return std::max<std::size_t>(count, 1);
}

ReadabilityBreakdown fkgl_from_counts(std::size_t words, std::size_t sentences,
                                      std::size_t syllables, const EvaluationConfig& config) {
  if (words == 0 || sentences == 0) throw Error(ErrorCode::EmptyText, "FKGL needs words and sentences");
  ReadabilityBreakdown r;
  r.words = words;
  r.sentences = sentences;
  r.syllables = syllables;
  r.sc = static_cast<double>(words) / static_cast<double>(sentences);
  r.ld = static_cast<double>(syllables) / static_cast<double>(words);
  r.fkgl = config.beta * r.sc + config.gamma * r.ld - config.epsilon;
  return r;
}

ReadabilityBreakdown fkgl(std::string_view s, const EvaluationConfig& config) {
  const std::size_t sentences = split_sentences(s).size();
  std::size_t words = 0, syllables = 0;
  for (const auto& tok : text::split_whitespace(s)) {
    if (!text::has_letter_or_digit(tok)) continue;
    ++words;
    // numbers without letters count as one syllable
    syllables += text::has_letter(tok) ? count_syllables(tok) : 1;
  }
  return fkgl_from_counts(words, sentences, syllables, config);
}

}  // namespace vexa
