#include <algorithm>
#include <set>

#include "vexa/evaluation.hpp"
#include "vexa/generation.hpp"
#include "vexa/text.hpp"

namespace vexa {

namespace {

constexpr std::string_view kBlindSentences[] = {
    "Be careful with unexpected texts and emails.",
    "Pause before you answer.",
    "Reach the organization through a phone number you already trust.",
    "When in doubt, ask someone you know.",
};

std::string quoted_list(const std::vector<std::string>& phrases) {
  std::string out;
  for (std::size_t i = 0; i < phrases.size(); ++i) {
    if (i) out += (i + 1 == phrases.size()) ? (phrases.size() > 2 ? ", and " : " and ") : ", ";
    out += "\"" + phrases[i] + "\"";
  }
  return out;
}

std::string neutral_text(const std::vector<std::string>& evidence) {
  std::string t = "The detector flagged this message as a likely scam.";
  if (!evidence.empty()) {
    t += " The words that most influenced that decision were " + quoted_list(evidence) + ".";
  }
  t += " Together these cues point to pressure tactics and a suspicious request, which are "
       "typical of scam messages. Do not follow any link or share personal information until "
       "you verify the sender through an official channel.";
  return t;
}

// Short common words, short sentences.
std::string high_vulnerability_text(const std::vector<std::string>& evidence) {
  std::string t = "This is a scam. Stay calm. You are safe if you wait. Here is what gave it away.";
  for (const auto& w : evidence) t += " One sign is \"" + w + "\".";
  t += " Do not click on the link. Do not send cash. Do not share a code. "
       "Ask a friend, or call the bank on a number you know.";
  return t;
}

// Long analytic sentences with polysyllabic vocabulary.
std::string low_vulnerability_text(const std::vector<std::string>& evidence) {
  std::string t =
      "Detector attribution identifies the following explicit indicators of fraudulent intent";
  t += evidence.empty() ? "." : ": " + quoted_list(evidence) + ".";
  t += " Collectively, these indicators demonstrate manipulative persuasion techniques "
       "characteristic of phishing, including artificial urgency, unsolicited financial "
       "incentives, and obfuscated destination addresses. Independent verification through "
       "authenticated organizational channels is recommended before undertaking any requested "
       "transaction or credential disclosure.";
  return t;
}

}  // namespace

std::string_view evidence_blind_text() {
  static const std::string text = [] {
    std::string t;
    for (auto s : kBlindSentences) t += (t.empty() ? "" : " ") + std::string(s);
    return t;
  }();
  return text;
}

Explanation mock_generate(const Prompt& prompt, MockStyle style) {
  Explanation e{prompt.message_id, prompt.condition, {}, GeneratorKind::Mock,
                std::string(kMockModelName)};
  if (style == MockStyle::EvidenceBlind) {
    // Generic warning; sentences that happen to share a lemma with the
    // evidence are left out.
    std::set<std::string> evidence_lemmas;
    for (const auto& w : prompt.evidence) {
      for (const auto& l : content_lemmas(w)) evidence_lemmas.insert(l);
    }
    for (auto s : kBlindSentences) {
      const auto lemmas = content_lemmas(s);
      const bool overlaps = std::any_of(lemmas.begin(), lemmas.end(),
                                        [&](const std::string& l) { return evidence_lemmas.contains(l); });
      if (!overlaps) e.text += (e.text.empty() ? "" : " ") + std::string(s);
    }
    if (e.text.empty()) e.text = "Caution advised.";
    return e;
  }
  switch (prompt.condition) {
    case Condition::XaiHighVulnerability: e.text = high_vulnerability_text(prompt.evidence); break;
    case Condition::XaiLowVulnerability: e.text = low_vulnerability_text(prompt.evidence); break;
    default: e.text = neutral_text(prompt.evidence); break;
  }
  return e;
}

}  // namespace vexa
