#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "vexa/error.hpp"
#include "vexa/pipeline.hpp"
#include "vexa/text.hpp"

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool mock = false;
  bool train = false;
  std::string persona;
  std::string conditions;
  std::string out;
  bool quiet = false;
};

std::vector<vexa::Condition> parse_condition_list(std::string list) {
  std::replace(list.begin(), list.end(), ',', ' ');
  std::vector<vexa::Condition> out;
  for (const auto& name : vexa::text::split_whitespace(list)) out.push_back(vexa::parse_condition(name));
  if (out.empty()) throw vexa::Error(vexa::ErrorCode::ConfigError, "empty --conditions list");
  return out;
}

vexa::RunConfig resolve_config(const Options& o) {
  vexa::RunConfig cfg;
  if (o.config_path.empty()) {
    // Without a config file the run uses the built-in synthetic corpus.
    nlohmann::json doc = {{"synthetic", {{"seed", o.seed.value_or(7)}, {"per_stratum", 100}}}};
    cfg = vexa::run_config_from_json(doc);
  } else {
    cfg = vexa::load_run_config(o.config_path);
  }
  if (o.seed) {
    cfg.seed = *o.seed;
    cfg.detector.seed = *o.seed;
    cfg.source_document["seed"] = *o.seed;
  }
  if (o.mock) {
    cfg.mock = true;
    cfg.source_document["mock"] = true;
  }
  if (o.train) {
    cfg.train = true;
    cfg.source_document["train"] = true;
  }
  if (!o.conditions.empty()) {
    cfg.conditions = parse_condition_list(o.conditions);
    nlohmann::json names = nlohmann::json::array();
    for (auto c : cfg.conditions) names.push_back(vexa::condition_name(c));
    cfg.source_document["conditions"] = names;
  } else if (!o.persona.empty()) {
    // --persona narrows the persona conditions to the chosen one.
    const auto v = vexa::parse_persona_flag(o.persona);
    std::vector<vexa::Condition> kept;
    for (auto c : cfg.conditions) {
      const auto p = vexa::condition_persona(c);
      if (!p || p == v) kept.push_back(c);
    }
    cfg.conditions = kept;
    cfg.source_document["persona"] = o.persona;
  }
  if (!o.out.empty()) {
    cfg.output_dir = o.out;
    cfg.source_document["output_dir"] = o.out;
  }
  return cfg;
}

int run_stage(const Options& o, vexa::Stage last) {
  const auto cfg = resolve_config(o);
  const auto result = vexa::run_pipeline(cfg, last);
  if (result.report) std::cout << vexa::render_table(*result.report);
  std::cout << "artifacts: " << result.run_dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vexa: detector-grounded, persona-conditioned scam explanations"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config_path, "Run configuration (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "Global seed");
    cmd->add_option("--out", o.out, "Output root for run directories");
    cmd->add_flag("-q,--quiet", o.quiet, "Only log warnings and errors");
  };
  auto add_generation = [&](CLI::App* cmd) {
    cmd->add_flag("--mock", o.mock, "Use the deterministic mock generator");
    cmd->add_flag("--train", o.train, "Train the detector instead of loading model_path");
    cmd->add_option("--persona", o.persona, "Persona condition to include: high, low or none")
        ->check(CLI::IsMember({"high", "low", "none"}));
    cmd->add_option("--conditions", o.conditions,
                    "Comma-separated conditions: pure_llm,xai_only,xai_high,xai_low");
  };

  auto* ingest = app.add_subcommand("ingest", "Load and validate the corpus");
  add_common(ingest);
  auto* train = app.add_subcommand("train", "Train and save the detector");
  add_common(train);
  auto* predict = app.add_subcommand("predict", "Predict every corpus message");
  add_common(predict);
  predict->add_flag("--train", o.train, "Train the detector instead of loading model_path");
  auto* sample = app.add_subcommand("sample", "Select the shared explanation subset");
  add_common(sample);
  sample->add_flag("--train", o.train, "Train the detector instead of loading model_path");
  auto* explain = app.add_subcommand("explain", "Attribute and generate explanations");
  add_common(explain);
  add_generation(explain);
  auto* evaluate = app.add_subcommand("evaluate", "Score explanations and write the report");
  add_common(evaluate);
  add_generation(evaluate);
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage");
  add_common(pipeline);
  add_generation(pipeline);

  auto* report = app.add_subcommand("report", "Aggregate an existing scores.jsonl");
  std::string scores_path;
  bool as_json = false;
  report->add_option("scores", scores_path, "scores.jsonl of a run")->required()->check(CLI::ExistingFile);
  report->add_option("--conditions", o.conditions, "Comma-separated conditions to report");
  report->add_flag("--json", as_json, "Print JSON instead of the table");

  auto* one = app.add_subcommand("explain-one", "Explain a single message");
  add_common(one);
  add_generation(one);
  std::string text, channel = "sms", subject;
  one->add_option("--text", text, "Message body")->required();
  one->add_option("--channel", channel, "email, sms or sns")->check(CLI::IsMember({"email", "sms", "sns"}));
  one->add_option("--subject", subject, "Email subject");

  auto* synth = app.add_subcommand("synth", "Write the synthetic corpus as JSON Lines");
  std::string synth_out;
  std::size_t per_stratum = 100;
  std::uint64_t synth_seed = 7;
  synth->add_option("output", synth_out, "Destination .jsonl")->required();
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--per-stratum", per_stratum, "Messages per channel and label");

  CLI11_PARSE(app, argc, argv);

  auto logger = spdlog::stderr_color_mt("vexa");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S] %^%l%$ %v");
  if (o.quiet) spdlog::set_level(spdlog::level::warn);

  try {
    if (*ingest) return run_stage(o, vexa::Stage::Ingest);
    if (*train) {
      o.train = true;
      return run_stage(o, vexa::Stage::Train);
    }
    if (*predict) return run_stage(o, vexa::Stage::Predict);
    if (*sample) return run_stage(o, vexa::Stage::Sample);
    if (*explain) return run_stage(o, vexa::Stage::Explain);
    if (*evaluate || *pipeline) return run_stage(o, vexa::Stage::Evaluate);
    if (*report) {
      std::vector<vexa::Condition> conditions(std::begin(vexa::kAllConditions), std::end(vexa::kAllConditions));
      if (!o.conditions.empty()) conditions = parse_condition_list(o.conditions);
      const auto r = vexa::report_from_scores(scores_path, conditions);
      std::cout << (as_json ? vexa::to_json(r).dump(2) + "\n" : vexa::render_table(r));
      return 0;
    }
    if (*one) {
      auto cfg = resolve_config(o);
      vexa::ExplainOneRequest req;
      req.text = text;
      req.channel = vexa::parse_channel(channel);
      if (!subject.empty()) req.subject = subject;
      req.persona = o.persona.empty() ? std::nullopt : vexa::parse_persona_flag(o.persona);
      vexa::print_explain_one(std::cout, vexa::explain_one(cfg, req));
      return 0;
    }
    if (*synth) {
      vexa::save_messages(synth_out, vexa::synth_corpus(synth_seed, per_stratum));
      return 0;
    }
  } catch (const vexa::Error& e) {
    std::cerr << "error";
    if (!e.stage().empty()) std::cerr << " [" << e.stage() << "]";
    std::cerr << " " << vexa::to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
