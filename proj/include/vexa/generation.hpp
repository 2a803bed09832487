#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vexa/attribution.hpp"
#include "vexa/corpus.hpp"
#include "vexa/http.hpp"
#include "vexa/persona.hpp"

namespace vexa {

enum class Condition { PureLLM, XaiOnly, XaiHighVulnerability, XaiLowVulnerability };

inline constexpr Condition kAllConditions[] = {Condition::PureLLM, Condition::XaiOnly,
                                               Condition::XaiHighVulnerability,
                                               Condition::XaiLowVulnerability};

std::string_view condition_name(Condition c);   // pure_llm | xai_only | xai_high | xai_low
std::string_view condition_label(Condition c);  // report row label, e.g. "XAI Only"
Condition parse_condition(std::string_view name);
bool uses_evidence(Condition c);
std::optional<Vulnerability> condition_persona(Condition c);

struct Prompt {
  std::string system_text;
  std::string user_text;
  Condition condition = Condition::PureLLM;
  std::string message_id;
  std::vector<std::string> evidence;  // verbatim phrases listed in user_text
};

enum class GeneratorKind { Remote, Mock };
std::string_view generator_name(GeneratorKind g);

struct Explanation {
  std::string message_id;
  Condition condition = Condition::PureLLM;
  std::string text;
  GeneratorKind generator = GeneratorKind::Mock;
  std::string model_name;
};

// Deterministic template fill. Evidence must be supplied exactly when the
// condition uses it; the instruction exactly for persona conditions (and for
// the matching persona). Anything else is ConditionMismatch.
Prompt build_prompt(Condition condition, const FormattedText& message, std::string message_id,
                    const std::optional<EvidenceSet>& evidence,
                    const std::optional<PersonaInstruction>& instruction);

struct LlmClientConfig {
  http::ClientConfig http{.base_url = "https://api.openai.com/v1",
                          .api_key_env_var = "OPENAI_API_KEY"};
  std::string model_name = "gpt-4o-mini";
  double temperature = 0.2;
  std::size_t max_tokens = 400;
  std::size_t max_in_flight = 4;
};

// One chat-completion request against an OpenAI-compatible endpoint.
Explanation generate(const LlmClientConfig& config, const Prompt& prompt);

// Runs generate over all prompts with at most config.max_in_flight requests
// in flight. Output index i always corresponds to prompts[i].
std::vector<Explanation> generate_all(const LlmClientConfig& config,
                                      const std::vector<Prompt>& prompts);

enum class MockStyle { EvidenceEchoing, EvidenceBlind };

inline constexpr std::string_view kMockModelName = "vexa-mock-v1";

Explanation mock_generate(const Prompt& prompt, MockStyle style);

// The generic warning used for evidence-blind explanations.
std::string_view evidence_blind_text();

nlohmann::ordered_json to_json(const Prompt& p);
nlohmann::ordered_json to_json(const Explanation& e);
Explanation explanation_from_json(const nlohmann::json& row);

}  // namespace vexa
