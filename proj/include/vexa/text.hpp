#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace vexa::text {

std::vector<std::string> split_whitespace(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string_view trim(std::string_view s);
std::string ascii_lower(std::string_view s);

// Splits a UTF-8 string into code points, each returned as its byte sequence.
// Invalid lead bytes are returned as single-byte units.
std::vector<std::string> utf8_chars(std::string_view s);

bool has_letter_or_digit(std::string_view word);
bool has_letter(std::string_view word);

// Risk patterns that survive stopword removal and punctuation stripping.
bool is_url_like(std::string_view word);
bool is_currency(std::string_view word);
bool is_emphatic(std::string_view word);
bool is_risk_token(std::string_view word);

// Strips leading/trailing ASCII punctuation. Risk tokens only lose enclosing
// quotes/brackets and trailing [.,;:] so that "$500", "bit.ly/x" and "now!!"
// keep their shape.
std::string strip_punctuation(std::string_view word);

inline constexpr std::string_view kStopwordsVersion = "vexa-stopwords-v1";
const std::unordered_set<std::string>& default_stopwords();

}  // namespace vexa::text
