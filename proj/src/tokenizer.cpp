#include <algorithm>
#include <map>
#include <set>

#include "vexa/detector.hpp"
#include "vexa/text.hpp"

namespace vexa {

Vocab::Vocab() {
  add(std::string(kPadPiece));
  add(std::string(kUnkPiece));
  for (Channel c : kAllChannels) add(std::string(channel_marker(c)));
}

Vocab::Vocab(const std::vector<std::string>& pieces) : Vocab() {
  for (const auto& p : pieces) {
    if (!contains(p)) add(p);
  }
}

void Vocab::add(std::string piece) {
  index_.emplace(piece, static_cast<PieceId>(pieces_.size()));
  pieces_.push_back(std::move(piece));
}

std::optional<PieceId> Vocab::find(std::string_view piece) const {
  auto it = index_.find(std::string(piece));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocab build_vocab(const MessageSet& corpus, std::size_t max_size) {
  if (corpus.empty()) throw Error(ErrorCode::CorpusEmpty, "cannot build a vocabulary from no messages");

  std::set<std::string> alphabet;
  std::map<std::string, std::size_t> ngram_counts;
  for (const auto& m : corpus.messages()) {
    for (const auto& word : text::split_whitespace(format_input(m).text)) {
      if (channel_from_marker(word)) continue;
      const auto chars = text::utf8_chars(text::ascii_lower(word));
      for (std::size_t i = 0; i < chars.size(); ++i) {
        alphabet.insert(chars[i]);
        std::string gram = chars[i];
        for (std::size_t n = 2; n <= Vocab::kMaxNgram && i + n <= chars.size(); ++n) {
          gram += chars[i + n - 1];
          ++ngram_counts[gram];
        }
      }
    }
  }

  if (max_size <= Vocab::kNumSpecials + alphabet.size()) {
    throw Error(ErrorCode::VocabTooSmall,
                "vocabulary size " + std::to_string(max_size) + " must exceed " +
                    std::to_string(Vocab::kNumSpecials) + " specials + " +
                    std::to_string(alphabet.size()) + " characters");
  }

  std::vector<std::pair<std::string, std::size_t>> ranked(ngram_counts.begin(), ngram_counts.end());
  // map iteration is already lexicographic, so a stable sort on count keeps ties ordered
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  std::vector<std::string> pieces(alphabet.begin(), alphabet.end());
  const std::size_t room = max_size - Vocab::kNumSpecials - alphabet.size();
  for (std::size_t i = 0; i < ranked.size() && i < room; ++i) pieces.push_back(ranked[i].first);
  return Vocab(pieces);
}

TokenizedInput tokenize(const FormattedText& formatted, const Vocab& vocab, std::size_t limit) {
  TokenizedInput out;
  out.words = text::split_whitespace(formatted.text);
  for (std::size_t w = 0; w < out.words.size(); ++w) {
    const auto& word = out.words[w];
    if (auto marker = channel_from_marker(word)) {
      out.piece_ids.push_back(*vocab.find(channel_marker(*marker)));
      out.alignment.push_back(w);
      continue;
    }
    const auto chars = text::utf8_chars(text::ascii_lower(word));
    std::size_t i = 0;
    while (i < chars.size()) {
      const std::size_t longest = std::min(Vocab::kMaxNgram, chars.size() - i);
      bool matched = false;
      for (std::size_t n = longest; n >= 1 && !matched; --n) {
        std::string piece;
        for (std::size_t k = 0; k < n; ++k) piece += chars[i + k];
        if (auto id = vocab.find(piece)) {
          out.piece_ids.push_back(*id);
          out.alignment.push_back(w);
          i += n;
          matched = true;
        }
      }
      if (!matched) {
        out.piece_ids.push_back(Vocab::kUnk);
        out.alignment.push_back(w);
        ++i;
      }
    }
  }
  out.piece_ids = truncate_front(out.piece_ids, limit);
  out.alignment = truncate_front(out.alignment, limit);
  return out;
}

}  // namespace vexa
