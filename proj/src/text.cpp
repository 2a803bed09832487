#include "vexa/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <regex>

namespace vexa::text {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ascii_punct(char c) {
  return static_cast<unsigned char>(c) < 0x80 &&
         std::ispunct(static_cast<unsigned char>(c)) != 0;
}

constexpr std::array<std::string_view, 5> kCurrencySymbols = {"$", "\xE2\x82\xAC" /* euro */,
                                                             "\xC2\xA3" /* pound */,
                                                             "\xC2\xA5" /* yen */,
                                                             "\xE2\x82\xB9" /* rupee */};

constexpr std::array<std::string_view, 12> kCurrencyWords = {
    "usd", "dollar", "eur", "euro", "gbp", "pound", "bucks", "btc", "inr", "yen", "cad", "aud"};

}  // namespace

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<std::string> utf8_chars(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto lead = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    if (lead >= 0xF0 && lead < 0xF8) len = 4;
    else if (lead >= 0xE0) len = 3;
    else if (lead >= 0xC0) len = 2;
    if (lead >= 0xF8 || i + len > s.size()) len = 1;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) {
        len = 1;
        break;
      }
    }
    out.emplace_back(s.substr(i, len));
    i += len;
  }
  return out;
}

bool has_letter_or_digit(std::string_view word) {
  return std::any_of(word.begin(), word.end(), [](char c) {
    return static_cast<unsigned char>(c) < 0x80 && std::isalnum(static_cast<unsigned char>(c));
  });
}

bool has_letter(std::string_view word) {
  return std::any_of(word.begin(), word.end(), [](char c) {
    return static_cast<unsigned char>(c) < 0x80 && std::isalpha(static_cast<unsigned char>(c));
  });
}

bool is_url_like(std::string_view word) {
  if (word.find("://") != std::string_view::npos) return true;
  const std::string lower = ascii_lower(word);
  if (lower.find("www.") != std::string::npos) return true;
  static const std::regex shortener(R"([a-z0-9-]+\.[a-z]{2,}/)");
  return std::regex_search(lower, shortener);
}

bool is_currency(std::string_view word) {
  for (auto sym : kCurrencySymbols) {
    if (word.find(sym) != std::string_view::npos) return true;
  }
  const bool has_digit = std::any_of(word.begin(), word.end(),
                                     [](char c) { return c >= '0' && c <= '9'; });
  if (!has_digit) return false;
  const std::string lower = ascii_lower(word);
  return std::any_of(kCurrencyWords.begin(), kCurrencyWords.end(),
                     [&](std::string_view w) { return lower.find(w) != std::string::npos; });
}

bool is_emphatic(std::string_view word) {
  int run = 0;
  for (char c : word) {
    run = (c == '!' || c == '?') ? run + 1 : 0;
    if (run >= 2) return true;
  }
  return false;
}

bool is_risk_token(std::string_view word) {
  return is_url_like(word) || is_currency(word) || is_emphatic(word);
}

std::string strip_punctuation(std::string_view word) {
  if (is_risk_token(word)) {
    constexpr std::string_view wrappers = "\"'`()[]{}<>";
    constexpr std::string_view trailing = "\"'`()[]{}<>.,;:";
    std::size_t b = 0, e = word.size();
    while (b < e && wrappers.find(word[b]) != std::string_view::npos) ++b;
    while (e > b && trailing.find(word[e - 1]) != std::string_view::npos) --e;
    return std::string(word.substr(b, e - b));
  }
  std::size_t b = 0, e = word.size();
  while (b < e && is_ascii_punct(word[b])) ++b;
  while (e > b && is_ascii_punct(word[e - 1])) --e;
  return std::string(word.substr(b, e - b));
}

const std::unordered_set<std::string>& default_stopwords() {
  // Fixed list of common English function words. Changing it changes
  // evidence selection, so bump kStopwordsVersion alongside any edit.
  static const std::unordered_set<std::string> words = {
      "a", "about", "above", "after", "again", "against", "all", "am", "an", "and",
      "any", "are", "aren't", "as", "at", "be", "because", "been", "before", "being",
      "below", "between", "both", "but", "by", "can", "cannot", "could", "couldn't",
      "did", "didn't", "do", "does", "doesn't", "doing", "don't", "down", "during",
      "each", "few", "for", "from", "further", "had", "hadn't", "has", "hasn't", "have",
      "haven't", "having", "he", "he'd", "he'll", "he's", "her", "here", "here's", "hers",
      "herself", "him", "himself", "his", "how", "how's", "i", "i'd", "i'll", "i'm",
      "i've", "if", "in", "into", "is", "isn't", "it", "it's", "its", "itself", "just",
      "let's", "me", "more", "most", "mustn't", "my", "myself", "no", "nor", "not", "of",
      "off", "on", "once", "only", "or", "other", "ought", "our", "ours", "ourselves",
      "out", "over", "own", "same", "shan't", "she", "she'd", "she'll", "she's", "should",
      "shouldn't", "so", "some", "such", "than", "that", "that's", "the", "their",
      "theirs", "them", "themselves", "then", "there", "there's", "these", "they",
      "they'd", "they'll", "they're", "they've", "this", "those", "through", "to", "too",
      "under", "until", "up", "very", "was", "wasn't", "we", "we'd", "we'll", "we're",
      "we've", "were", "weren't", "what", "what's", "when", "when's", "where", "where's",
      "which", "while", "who", "who's", "whom", "why", "why's", "will", "with", "won't",
      "would", "wouldn't", "you", "you'd", "you'll", "you're", "you've", "your", "yours",
      "yourself", "yourselves", "s", "t",
  };
  return words;
}

}  // namespace vexa::text
