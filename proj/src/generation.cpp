#include "vexa/generation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

#include "vexa/text.hpp"

namespace vexa {

std::string_view condition_name(Condition c) {
  switch (c) {
    case Condition::PureLLM: return "pure_llm";
    case Condition::XaiOnly: return "xai_only";
    case Condition::XaiHighVulnerability: return "xai_high";
    case Condition::XaiLowVulnerability: return "xai_low";
  }
  return "pure_llm";
}

std::string_view condition_label(Condition c) {
  switch (c) {
    case Condition::PureLLM: return "No XAI";
    case Condition::XaiOnly: return "XAI Only";
    case Condition::XaiHighVulnerability: return "XAI + High Vulnerability";
    case Condition::XaiLowVulnerability: return "XAI + Low Vulnerability";
  }
  return "No XAI";
}

Condition parse_condition(std::string_view name) {
  const std::string n = text::ascii_lower(text::trim(name));
  for (Condition c : kAllConditions) {
    if (n == condition_name(c)) return c;
  }
  if (n == "pure" || n == "no_xai") return Condition::PureLLM;
  if (n == "xai") return Condition::XaiOnly;
  throw Error(ErrorCode::InvalidArgument, "unknown condition '" + std::string(name) + "'");
}

bool uses_evidence(Condition c) { return c != Condition::PureLLM; }

std::optional<Vulnerability> condition_persona(Condition c) {
  if (c == Condition::XaiHighVulnerability) return Vulnerability::HighVulnerability;
  if (c == Condition::XaiLowVulnerability) return Vulnerability::LowVulnerability;
  return std::nullopt;
}

std::string_view generator_name(GeneratorKind g) { return g == GeneratorKind::Remote ? "remote" : "mock"; }

Prompt build_prompt(Condition condition, const FormattedText& message, std::string message_id,
                    const std::optional<EvidenceSet>& evidence,
                    const std::optional<PersonaInstruction>& instruction) {
  const auto persona = condition_persona(condition);
  const auto mismatch = [&](const std::string& why) {
    return Error(ErrorCode::ConditionMismatch,
                 std::string(condition_name(condition)) + " prompt for '" + message_id + "': " + why);
  };
  if (uses_evidence(condition) != evidence.has_value()) {
    throw mismatch(evidence ? "evidence supplied but not used" : "evidence required");
  }
  if (persona.has_value() != instruction.has_value()) {
    throw mismatch(instruction ? "persona instruction supplied but not used"
                               : "persona instruction required");
  }
  if (persona && instruction->vulnerability != *persona) {
    throw mismatch("instruction is for the other persona");
  }

  Prompt p;
  p.condition = condition;
  p.message_id = std::move(message_id);
  p.system_text =
      "You explain to a non-expert reader why a message that a scam detector has already "
      "flagged as a scam is risky. Do not classify the message or question the verdict; "
      "explain it.";
  if (evidence) {
    p.system_text +=
        " Reference the detector-derived cues listed in the request and mention each one "
        "by name.";
  }

  p.user_text = "Message:\n<<<\n" + message.text + "\n>>>\n";
  if (evidence) {
    p.user_text += "\nDetector evidence (most influential first):\n";
    for (const auto& phrase : evidence->phrases) {
      p.user_text += "- " + phrase.word + "\n";
      p.evidence.push_back(phrase.word);
    }
  }
  if (instruction) p.user_text += "\n" + instruction->rendered + "\n";
  p.user_text += "\nWrite a short explanation for the reader.";
  return p;
}

Explanation generate(const LlmClientConfig& config, const Prompt& prompt) {
  const nlohmann::json body = {
      {"model", config.model_name},
      {"messages",
       nlohmann::json::array({{{"role", "system"}, {"content", prompt.system_text}},
                              {{"role", "user"}, {"content", prompt.user_text}}})},
      {"temperature", config.temperature},
      {"max_tokens", config.max_tokens}};
  const nlohmann::json response = http::post_json(config.http, "/chat/completions", body);

  std::string content;
  try {
    const auto& c = response.at("choices").at(0).at("message").at("content");
    if (!c.is_null()) content = c.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadResponse, "chat completion without choices[0].message.content: " +
                                            std::string(e.what()));
  }
  if (text::trim(content).empty()) {
    throw Error(ErrorCode::EmptyCompletion, "empty completion for '" + prompt.message_id + "'");
  }
  return {prompt.message_id, prompt.condition, std::string(text::trim(content)), GeneratorKind::Remote,
          config.model_name};
}

std::vector<Explanation> generate_all(const LlmClientConfig& config,
                                      const std::vector<Prompt>& prompts) {
  std::vector<std::optional<Explanation>> results(prompts.size());
  std::vector<std::exception_ptr> errors(prompts.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < prompts.size(); i = next++) {
      try {
        results[i] = generate(config, prompts[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(config.max_in_flight, 1, std::max<std::size_t>(prompts.size(), 1));
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  pool.clear();

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<Explanation> out;
  out.reserve(results.size());
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

nlohmann::ordered_json to_json(const Prompt& p) {
  return {{"message_id", p.message_id},
          {"condition", condition_name(p.condition)},
          {"system", p.system_text},
          {"user", p.user_text}};
}

nlohmann::ordered_json to_json(const Explanation& e) {
  return {{"message_id", e.message_id},
          {"condition", condition_name(e.condition)},
          {"text", e.text},
          {"generator", generator_name(e.generator)},
          {"model_name", e.model_name}};
}

Explanation explanation_from_json(const nlohmann::json& row) {
  Explanation e;
  e.message_id = row.at("message_id").get<std::string>();
  e.condition = parse_condition(row.at("condition").get<std::string>());
  e.text = row.at("text").get<std::string>();
  e.generator = row.at("generator").get<std::string>() == "remote" ? GeneratorKind::Remote
                                                                   : GeneratorKind::Mock;
  e.model_name = row.value("model_name", "");
  if (text::trim(e.text).empty()) {
    throw Error(ErrorCode::EmptyCompletion, "explanation for '" + e.message_id + "' is empty");
  }
  return e;
}

}  // namespace vexa
