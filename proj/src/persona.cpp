#include "vexa/persona.hpp"

#include "vexa/error.hpp"
#include "vexa/text.hpp"

namespace vexa {

namespace {

// Directive phrase bank. Wording only shapes style, so it deliberately avoids
// any vocabulary that scam messages use.
constexpr std::string_view kToneCalm =
    "Keep the tone calm, gentle and reassuring, never alarming or fearful.";
constexpr std::string_view kToneNeutral = "Keep the tone neutral and matter-of-fact.";
constexpr std::string_view kDetailContextual =
    "Give contextual, step-by-step guidance in short, plain sentences that explain what each "
    "sign means.";
constexpr std::string_view kDetailConcise =
    "Be concise and analytical; foreground explicit evidence and state each indicator precisely.";
constexpr std::string_view kFramingSupportive =
    "Use supportive second-person framing that speaks directly to the reader.";
constexpr std::string_view kFramingImpersonal =
    "Use impersonal, analytical framing without addressing the reader.";

}  // namespace

Persona persona_from_vulnerability(Vulnerability level) {
  if (level == Vulnerability::HighVulnerability) {
    return {TraitLevel::Low, TraitLevel::High, TraitLevel::High, level};
  }
  return {TraitLevel::High, TraitLevel::Low, TraitLevel::Low, level};
}

Persona persona_from_vulnerability(std::string_view tag) {
  const std::string t = text::ascii_lower(text::trim(tag));
  if (t == "high" || t == "highvulnerability" || t == "high_vulnerability") {
    return persona_from_vulnerability(Vulnerability::HighVulnerability);
  }
  if (t == "low" || t == "lowvulnerability" || t == "low_vulnerability") {
    return persona_from_vulnerability(Vulnerability::LowVulnerability);
  }
  throw Error(ErrorCode::UnknownLevel, "unknown vulnerability level '" + std::string(tag) + "'");
}

std::optional<Vulnerability> parse_persona_flag(std::string_view flag) {
  const std::string t = text::ascii_lower(text::trim(flag));
  if (t == "none") return std::nullopt;
  return persona_from_vulnerability(t).vulnerability;
}

std::string_view vulnerability_name(Vulnerability v) {
  return v == Vulnerability::HighVulnerability ? "high" : "low";
}

PersonaInstruction build_instruction(const Persona& persona) {
  const bool high = persona.conscientiousness == TraitLevel::Low &&
                    persona.neuroticism == TraitLevel::High &&
                    persona.agreeableness == TraitLevel::High;
  const bool low = persona.conscientiousness == TraitLevel::High &&
                   persona.neuroticism == TraitLevel::Low &&
                   persona.agreeableness == TraitLevel::Low;
  if ((persona.vulnerability == Vulnerability::HighVulnerability && !high) ||
      (persona.vulnerability == Vulnerability::LowVulnerability && !low)) {
    throw Error(ErrorCode::InvalidArgument, "persona traits do not match its vulnerability level");
  }

  PersonaInstruction out;
  out.vulnerability = persona.vulnerability;
  out.tone_directive = persona.neuroticism == TraitLevel::High ? kToneCalm : kToneNeutral;
  out.detail_directive =
      persona.conscientiousness == TraitLevel::Low ? kDetailContextual : kDetailConcise;
  out.structure_directive =
      persona.agreeableness == TraitLevel::High ? kFramingSupportive : kFramingImpersonal;
  out.rendered = "Style instructions: " + out.tone_directive + " " + out.detail_directive + " " +
                 out.structure_directive;
  return out;
}

}  // namespace vexa
