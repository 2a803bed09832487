#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "vexa/evaluation.hpp"
#include "vexa/text.hpp"

namespace vexa {

const std::set<std::string>& LexiconNliScorer::lexicon() {
  static const std::set<std::string> lemmas = [] {
    constexpr std::string_view words[] = {
        "scam",     "scammer",    "fraud",   "fraudulent", "phishing", "suspicious", "urgent",
        "urgency",  "pressure",   "deadline", "threat",    "click",    "link",       "prize",
        "reward",   "verify",     "password", "credential", "unsolicited", "impersonation",
        "manipulative", "risk",   "warning", "indicator", "cue",
    };
    std::set<std::string> out;
    for (auto w : words) {
      for (const auto& tok : text::split_whitespace(w)) out.insert(lemmatize(tok));
    }
    return out;
  }();
  return lemmas;
}

NliScores LexiconNliScorer::score(std::string_view premise, std::string_view /*hypothesis*/) {
  const auto lemmas = content_lemmas(premise);
  const auto& lex = lexicon();
  const auto hits = std::count_if(lemmas.begin(), lemmas.end(),
                                  [&](const std::string& l) { return lex.contains(l); });
  if (hits >= 2) return {0.8, 0.15, 0.05};
  if (hits == 1) return {0.4, 0.4, 0.2};
  return {0.1, 0.5, 0.4};
}

NliScores RemoteNliScorer::score(std::string_view premise, std::string_view hypothesis) {
  const nlohmann::json body = {{"premise", premise}, {"hypothesis", hypothesis}};
  const auto resp = http::post_json(config_.http, "/nli", body);
  NliScores s;
  try {
    s.entailment = resp.at("entailment").get<double>();
    s.neutral = resp.at("neutral").get<double>();
    s.contradiction = resp.at("contradiction").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadResponse, std::string("NLI response: ") + e.what());
  }
  validate(s);
  return s;
}

NliScores score_nli(NliScorer& scorer, const Explanation& explanation,
                    const EvaluationConfig& config) {
  if (config.hypothesis != kNliHypothesis) {
    throw Error(ErrorCode::ConfigError, "NLI hypothesis differs from the fixed risk hypothesis");
  }
  const NliScores s = scorer.score(explanation.text, config.hypothesis);
  validate(s);
  return s;
}

MessageScore score_explanation(const Explanation& explanation, const EvidenceSet* evidence,
                               NliScorer& scorer, const EvaluationConfig& config) {
  MessageScore m;
  m.message_id = explanation.message_id;
  m.condition = explanation.condition;
  if (uses_evidence(explanation.condition)) {
    if (evidence == nullptr) {
      throw Error(ErrorCode::EmptyEvidence, "no evidence for " + explanation.message_id);
    }
    m.faithfulness = faithfulness(*evidence, explanation);
  }
  m.nli = score_nli(scorer, explanation, config);
  m.correctness = correctness(m.nli, config);
  m.readability = fkgl(explanation.text, config);
  return m;
}

MeanStd mean_std(const std::vector<double>& xs) {
  if (xs.empty()) throw Error(ErrorCode::EmptyGroup, "cannot summarize an empty group");
  MeanStd r;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return r;
}

MetricReport aggregate_report(const std::vector<MessageScore>& scores,
                              const std::vector<Condition>& conditions) {
  MetricReport report;
  for (Condition c : conditions) {
    std::vector<double> faith, corr, grade;
    for (const auto& s : scores) {
      if (s.condition != c) continue;
      if (s.faithfulness) faith.push_back(*s.faithfulness);
      corr.push_back(s.correctness);
      grade.push_back(s.readability.fkgl);
    }
    if (corr.empty()) {
      throw Error(ErrorCode::EmptyGroup,
                  "no scored explanations for condition " + std::string(condition_name(c)));
    }
    ConditionRow row;
    row.condition = c;
    row.n = corr.size();
    if (uses_evidence(c)) row.faithfulness = mean_std(faith);
    row.correctness = mean_std(corr);
    row.fkgl = mean_std(grade);
    report.rows.push_back(row);
  }
  return report;
}

namespace {

nlohmann::ordered_json to_json(const MeanStd& m) {
  nlohmann::ordered_json j;
  j["mean"] = m.mean;
  j["std"] = m.std;
  return j;
}

std::string cell(const MeanStd& m) { return fmt::format("{:.3f} ± {:.3f}", m.mean, m.std); }

std::size_t display_width(std::string_view s) { return text::utf8_chars(s).size(); }

std::string pad(std::string_view s, std::size_t width) {
  std::string out(s);
  out.append(width - std::min(width, display_width(s)), ' ');
  return out;
}

}  // namespace

nlohmann::ordered_json to_json(const MessageScore& s) {
  nlohmann::ordered_json j;
  j["message_id"] = s.message_id;
  j["condition"] = condition_name(s.condition);
  j["faithfulness"] = s.faithfulness ? nlohmann::ordered_json(*s.faithfulness) : nlohmann::ordered_json(nullptr);
  j["nli"] = {{"entailment", s.nli.entailment},
              {"neutral", s.nli.neutral},
              {"contradiction", s.nli.contradiction}};
  j["correctness"] = s.correctness;
  j["readability"] = {{"words", s.readability.words},
                      {"sentences", s.readability.sentences},
                      {"syllables", s.readability.syllables},
                      {"sc", s.readability.sc},
                      {"ld", s.readability.ld},
                      {"fkgl", s.readability.fkgl}};
  return j;
}

MessageScore message_score_from_json(const nlohmann::json& row) {
  try {
    MessageScore s;
    s.message_id = row.at("message_id").get<std::string>();
    s.condition = parse_condition(row.at("condition").get<std::string>());
    if (row.contains("faithfulness") && !row["faithfulness"].is_null()) {
      s.faithfulness = row["faithfulness"].get<double>();
    }
    const auto& nli = row.at("nli");
    s.nli = {nli.at("entailment").get<double>(), nli.at("neutral").get<double>(),
             nli.at("contradiction").get<double>()};
    s.correctness = row.at("correctness").get<double>();
    const auto& r = row.at("readability");
    s.readability.words = r.at("words").get<std::size_t>();
    s.readability.sentences = r.at("sentences").get<std::size_t>();
    s.readability.syllables = r.at("syllables").get<std::size_t>();
    s.readability.sc = r.at("sc").get<double>();
    s.readability.ld = r.at("ld").get<double>();
    s.readability.fkgl = r.at("fkgl").get<double>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MissingField, std::string("score row: ") + e.what());
  }
}

nlohmann::ordered_json to_json(const MetricReport& report) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    nlohmann::ordered_json j;
    j["condition"] = condition_name(r.condition);
    j["label"] = condition_label(r.condition);
    j["n"] = r.n;
    j["faithfulness"] = r.faithfulness ? to_json(*r.faithfulness) : nlohmann::ordered_json(nullptr);
    j["correctness"] = to_json(r.correctness);
    j["fkgl"] = to_json(r.fkgl);
    rows.push_back(std::move(j));
  }
  nlohmann::ordered_json out;
  out["columns"] = {"Faithfulness", "Correctness", "FKGL"};
  out["rows"] = std::move(rows);
  return out;
}

std::string render_table(const MetricReport& report) {
  std::vector<std::vector<std::string>> grid;
  grid.push_back({"Condition", "Faithfulness", "Correctness", "FKGL"});
  for (const auto& r : report.rows) {
    grid.push_back({std::string(condition_label(r.condition)),
                    r.faithfulness ? cell(*r.faithfulness) : "--", cell(r.correctness),
                    cell(r.fkgl)});
  }
  std::vector<std::size_t> widths(grid.front().size(), 0);
  for (const auto& line : grid) {
    for (std::size_t c = 0; c < line.size(); ++c) widths[c] = std::max(widths[c], display_width(line[c]));
  }
  auto render_line = [&](const std::vector<std::string>& line) {
    std::string out;
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (c) out += " | ";
      out += c + 1 == line.size() ? line[c] : pad(line[c], widths[c]);
    }
    return out + "\n";
  };
  std::string out = render_line(grid.front());
  std::size_t total = 0;
  for (auto w : widths) total += w;
  out += std::string(total + 3 * (widths.size() - 1), '-') + "\n";
  for (std::size_t i = 1; i < grid.size(); ++i) out += render_line(grid[i]);
  return out;
}

}  // namespace vexa
