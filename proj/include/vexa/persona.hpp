#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace vexa {

enum class TraitLevel { Low, High };
enum class Vulnerability { HighVulnerability, LowVulnerability };

struct Persona {
  TraitLevel conscientiousness = TraitLevel::Low;
  TraitLevel neuroticism = TraitLevel::High;
  TraitLevel agreeableness = TraitLevel::High;
  Vulnerability vulnerability = Vulnerability::HighVulnerability;

  bool operator==(const Persona&) const = default;
};

struct PersonaInstruction {
  Vulnerability vulnerability = Vulnerability::HighVulnerability;
  std::string tone_directive;       // from neuroticism
  std::string structure_directive;  // framing, from agreeableness
  std::string detail_directive;     // granularity, from conscientiousness
  std::string rendered;
};

inline constexpr std::string_view kPersonaBankVersion = "vexa-persona-bank-v1";

Persona persona_from_vulnerability(Vulnerability level);
// Accepts "high" / "low" (and the enum spellings); anything else is UnknownLevel.
Persona persona_from_vulnerability(std::string_view tag);

// "high" | "low" | "none"; "none" maps to no persona.
std::optional<Vulnerability> parse_persona_flag(std::string_view flag);
std::string_view vulnerability_name(Vulnerability v);  // "high" | "low"

PersonaInstruction build_instruction(const Persona& persona);

}  // namespace vexa
