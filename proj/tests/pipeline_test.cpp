#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "doctest.h"
#include "vexa/error.hpp"
#include "vexa/pipeline.hpp"

using namespace vexa;
namespace fs = std::filesystem;

namespace {

fs::path scratch_root() {
  return fs::temp_directory_path() / ("vexa_pipeline_test_" + std::to_string(::getpid()));
}

fs::path scratch(const std::string& name) {
  const auto dir = scratch_root() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig mock_config(const fs::path& out, std::size_t per_stratum = 40) {
  nlohmann::json doc = {{"synthetic", {{"seed", 7}, {"per_stratum", per_stratum}}},
                        {"train", true},
                        {"mock", true},
                        {"seed", 11},
                        {"output_dir", out.string()}};
  return run_config_from_json(doc);
}

struct QuietLogs {
  QuietLogs() { spdlog::set_level(spdlog::level::warn); }
  ~QuietLogs() { fs::remove_all(scratch_root()); }
};
const QuietLogs quiet;

}  // namespace

TEST_CASE("full mock run writes every artifact and a four-row report") {
  const auto out = scratch("full");
  const auto result = run_pipeline(mock_config(out));
  REQUIRE(result.report.has_value());
  CHECK(result.report->rows.size() == 4);
  for (const char* f : {"messages.jsonl", "model.json", "train_report.json", "predictions.jsonl",
                        "sample.jsonl", "evidence.jsonl", "prompts.jsonl", "explanations.jsonl",
                        "scores.jsonl", "report.json", "report.txt", "manifest.json"}) {
    CHECK_MESSAGE(fs::exists(result.run_dir / f), f);
  }
  CHECK(result.run_dir.parent_path() == out);

  const auto manifest = nlohmann::json::parse(slurp(result.run_dir / "manifest.json"));
  CHECK(manifest["seed"] == 11);
  CHECK(manifest["seeds"]["attribution"] == derive_seeds(11).attribution);
  CHECK(manifest["config"]["mock"] == true);
  CHECK(manifest["stages"].size() == 7);
}

TEST_CASE("every condition explains the same message subset") {
  const auto out = scratch("subset");
  const auto result = run_pipeline(mock_config(out));
  std::map<std::string, std::set<std::string>> ids;
  for (const auto& row : read_jsonl(result.run_dir / "explanations.jsonl")) {
    ids[row["condition"].get<std::string>()].insert(row["message_id"].get<std::string>());
  }
  REQUIRE(ids.size() == 4);
  for (const auto& [cond, set] : ids) CHECK_MESSAGE(set == ids.begin()->second, cond);
  std::set<std::string> sampled;
  for (const auto& row : read_jsonl(result.run_dir / "evidence.jsonl")) sampled.insert(row["id"].get<std::string>());
  CHECK(sampled == ids.begin()->second);
  CHECK(sampled.size() == result.explained_messages);
}

TEST_CASE("two identical mock runs produce byte-identical artifacts") {
  const auto out = scratch("determinism");
  const auto a = run_pipeline(mock_config(out));
  const auto b = run_pipeline(mock_config(out));
  REQUIRE(a.run_dir != b.run_dir);
  for (const char* f : {"evidence.jsonl", "prompts.jsonl", "explanations.jsonl", "scores.jsonl",
                        "report.json", "report.txt", "model.json"}) {
    CHECK_MESSAGE(slurp(a.run_dir / f) == slurp(b.run_dir / f), f);
  }
}

TEST_CASE("a missing model without training is a configuration error") {
  const auto out = scratch("missing_model");
  auto cfg = mock_config(out);
  cfg.train = false;
  cfg.model_path = out / "does_not_exist.json";
  try {
    run_pipeline(cfg);
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
    CHECK(e.stage() == "train");
  }
}

TEST_CASE("a saved model is reused and gives the same report") {
  const auto out = scratch("reuse");
  auto cfg = mock_config(out);
  cfg.model_path = out / "detector.json";
  const auto trained = run_pipeline(cfg);
  REQUIRE(fs::exists(cfg.model_path));
  cfg.train = false;
  const auto loaded = run_pipeline(cfg);
  CHECK(slurp(trained.run_dir / "report.txt") == slurp(loaded.run_dir / "report.txt"));
  CHECK(slurp(trained.run_dir / "evidence.jsonl") == slurp(loaded.run_dir / "evidence.jsonl"));
}

TEST_CASE("stopping early skips later artifacts") {
  const auto out = scratch("partial");
  const auto result = run_pipeline(mock_config(out), Stage::Predict);
  CHECK_FALSE(result.report.has_value());
  CHECK(fs::exists(result.run_dir / "predictions.jsonl"));
  CHECK_FALSE(fs::exists(result.run_dir / "sample.jsonl"));
  CHECK(fs::exists(result.run_dir / "manifest.json"));
}

TEST_CASE("report can be rebuilt from scores") {
  const auto out = scratch("rebuild");
  const auto result = run_pipeline(mock_config(out));
  const std::vector<Condition> all(std::begin(kAllConditions), std::end(kAllConditions));
  const auto again = report_from_scores(result.run_dir / "scores.jsonl", all);
  CHECK(render_table(again) == slurp(result.run_dir / "report.txt"));
}

TEST_CASE("a condition subset yields only those rows") {
  const auto out = scratch("conditions");
  auto cfg = mock_config(out);
  cfg.conditions = {Condition::PureLLM, Condition::XaiLowVulnerability};
  const auto result = run_pipeline(cfg);
  REQUIRE(result.report->rows.size() == 2);
  CHECK(result.report->rows[1].condition == Condition::XaiLowVulnerability);
}

TEST_CASE("config parsing and environment interpolation") {
  ::setenv("VEXA_TEST_NLI_URL", "http://127.0.0.1:9", 1);
  const nlohmann::json doc = {{"synthetic", {{"seed", 1}}},
                              {"nli", {{"mock", false}, {"base_url", "${VEXA_TEST_NLI_URL}/v2"}}},
                              {"conditions", {"pure_llm", "xai_high"}},
                              {"sample_fraction", 0.5}};
  const auto cfg = run_config_from_json(doc);
  CHECK(cfg.nli.http.base_url == "http://127.0.0.1:9/v2");
  CHECK_FALSE(cfg.nli_mock);
  CHECK(cfg.conditions == std::vector<Condition>{Condition::PureLLM, Condition::XaiHighVulnerability});
  CHECK(cfg.sample_fraction == 0.5);
  // The manifest copy keeps the placeholder, not the value.
  CHECK(cfg.source_document["nli"]["base_url"] == "${VEXA_TEST_NLI_URL}/v2");

  const auto defaults = run_config_from_json({{"synthetic", nlohmann::json::object()}});
  CHECK(defaults.sample_fraction == 0.10);
  CHECK(defaults.conditions.size() == 4);
  CHECK(defaults.evaluation.alpha == 0.5);

  auto expect_config_error = [](const nlohmann::json& bad) {
    try {
      run_config_from_json(bad);
      FAIL("expected ConfigError for " << bad.dump());
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ConfigError);
    }
  };
  expect_config_error({{"synthetic", {{"seed", 1}}}, {"llm", {{"base_url", "${VEXA_TEST_SURELY_UNSET}"}}}});
  expect_config_error({{"synthetic", {{"seed", 1}}}, {"colour", 1}});
  expect_config_error({{"synthetic", {{"seed", 1}}}, {"sample_fraction", 0.0}});
  expect_config_error({{"synthetic", {{"seed", 1}}}, {"conditions", {"xai_only", "xai_only"}}});
  expect_config_error(nlohmann::json::object());
}

TEST_CASE("corpus files are read relative to the config file") {
  const auto dir = scratch("files");
  save_messages(dir / "corpus.jsonl", synth_corpus(3, 30));
  {
    std::ofstream raw(dir / "raw_sms.jsonl");
    raw << R"({"body": "Your parcel is held, pay the fee at bit.ly/xx now", "label": "spam"})" << "\n";
    raw << R"({"body": "see you at the game tonight", "label": "ham"})" << "\n";
  }
  {
    std::ofstream cfg(dir / "run.json");
    cfg << nlohmann::json{{"corpus", {{{"path", "corpus.jsonl"}}, {{"path", "raw_sms.jsonl"}, {"channel", "sms"}}}},
                          {"train", true},
                          {"mock", true},
                          {"output_dir", (dir / "runs").string()}}
               .dump();
  }
  const auto cfg = load_run_config(dir / "run.json");
  const auto result = run_pipeline(cfg, Stage::Ingest);
  const auto messages = load_messages(result.run_dir / "messages.jsonl");
  CHECK(messages.size() == 6 * 30 + 2);
  CHECK(messages.messages().back().id == "raw_sms-sms-1");
}

TEST_CASE("explain-one maps the persona flag to a condition") {
  const auto out = scratch("one");
  auto cfg = mock_config(out, 30);
  ExplainOneRequest req;
  req.text = "URGENT: claim your $900 prize at bit.ly/qq now";
  const auto none = explain_one(cfg, req);
  CHECK(none.condition == Condition::XaiOnly);
  CHECK_FALSE(none.evidence.phrases.empty());
  CHECK(faithfulness(none.evidence, none.explanation) == 1.0);

  req.persona = Vulnerability::HighVulnerability;
  const auto high = explain_one(cfg, req);
  CHECK(high.condition == Condition::XaiHighVulnerability);
  std::ostringstream printed;
  print_explain_one(printed, high);
  CHECK(printed.str().find("evidence:") != std::string::npos);
  CHECK(printed.str().find(high.explanation.text) != std::string::npos);
}

TEST_CASE("explain-one against an unreachable endpoint names the stage") {
  const auto out = scratch("unreachable");
  auto cfg = mock_config(out, 30);
  cfg.mock = false;
  cfg.llm.http.base_url = "http://127.0.0.1:1";
  cfg.llm.http.api_key_env_var = "";
  cfg.llm.http.max_retries = 0;
  ExplainOneRequest req;
  req.text = "verify your account at bit.ly/zz";
  try {
    explain_one(cfg, req);
    FAIL("expected a transport error");
  } catch (const Error& e) {
    CHECK(e.stage() == "explain");
    CHECK((e.code() == ErrorCode::Transport || e.code() == ErrorCode::Timeout));
  }
}
