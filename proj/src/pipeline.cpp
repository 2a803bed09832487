#include "vexa/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "vexa/error.hpp"
#include "vexa/persona.hpp"
#include "vexa/text.hpp"

namespace vexa {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << content;
}

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

// Runs fn inside a stage, tagging any escaping error with the stage name.
template <typename Fn>
auto in_stage(Stage stage, Fn&& fn) -> decltype(fn()) {
  const std::string name(stage_name(stage));
  try {
    return fn();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw Error(e.code(), name, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    throw Error(ErrorCode::IoError, name, e.what());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadResponse, name, e.what());
  }
}

MessageSet load_corpus(const RunConfig& config) {
  if (config.corpus.empty()) {
    return synth_corpus(config.synthetic->seed, config.synthetic->per_stratum);
  }
  std::vector<Message> all;
  for (const auto& src : config.corpus) {
    if (!std::filesystem::exists(src.path)) {
      throw Error(ErrorCode::ConfigError, "corpus file not found: " + src.path.string());
    }
    if (src.channel) {
      const std::string source = src.source.empty() ? src.path.stem().string() : src.source;
      const auto set = ingest(read_jsonl(src.path), *src.channel, source);
      all.insert(all.end(), set.messages().begin(), set.messages().end());
    } else {
      const auto set = load_messages(src.path);
      all.insert(all.end(), set.messages().begin(), set.messages().end());
    }
  }
  return MessageSet(std::move(all));
}

DetectorModel obtain_model(const RunConfig& config, const MessageSet& corpus,
                           const std::filesystem::path& run_dir) {
  if (config.train) {
    TrainReport report;
    DetectorModel model = train(corpus, config.detector, &report);
    spdlog::info("trained detector: {} epochs, best epoch {}, validation macro F1 {:.4f}",
                 report.epochs_run, report.best_epoch, report.best_val_macro_f1);
    nlohmann::ordered_json j;
    j["epochs_run"] = report.epochs_run;
    j["best_epoch"] = report.best_epoch;
    j["best_val_macro_f1"] = report.best_val_macro_f1;
    j["stopped_early"] = report.stopped_early;
    j["val_macro_f1"] = report.val_macro_f1;
    if (!run_dir.empty()) {
      write_text(run_dir / "train_report.json", j.dump(2) + "\n");
      save_model(model, run_dir / "model.json");
    }
    if (!config.model_path.empty()) save_model(model, config.model_path);
    return freeze(std::move(model));
  }
  if (config.model_path.empty() || !std::filesystem::exists(config.model_path)) {
    throw Error(ErrorCode::ConfigError,
                "no model file at '" + config.model_path.string() + "'; train one with --train");
  }
  return freeze(load_model(config.model_path));
}

EvidenceSet attribute(const DetectorModel& model, const Message& m, const RunConfig& config,
                      std::uint64_t attribution_seed) {
  const auto input = tokenize(format_input(m), model.vocab(), model.config().token_limit);
  AttributionConfig ac = config.attribution;
  ac.seed = message_seed(attribution_seed, m.id);
  const auto words = aggregate_to_words(gradient_shap(model, input, ac), input);
  return filter_evidence(words, text::default_stopwords(), config.evidence_k);
}

bool scorable(const EvidenceSet& e) {
  for (const auto& p : e.phrases) {
    if (!content_lemmas(p.word).empty()) return true;
  }
  return false;
}

std::unique_ptr<NliScorer> make_scorer(const RunConfig& config) {
  if (config.nli_mock) return std::make_unique<LexiconNliScorer>();
  return std::make_unique<RemoteNliScorer>(config.nli);
}

// Scores explanations with at most `workers` concurrent calls; output order
// follows the input and the lowest-index failure is rethrown.
std::vector<MessageScore> score_all(const std::vector<Explanation>& explanations,
                                    const std::map<std::string, EvidenceSet>& evidence,
                                    NliScorer& scorer, const EvaluationConfig& eval,
                                    std::size_t workers) {
  std::vector<std::optional<MessageScore>> out(explanations.size());
  std::vector<std::exception_ptr> errors(explanations.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < explanations.size(); i = next++) {
      try {
        const auto& e = explanations[i];
        const auto it = evidence.find(e.message_id);
        out[i] = score_explanation(e, it == evidence.end() ? nullptr : &it->second, scorer, eval);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const std::size_t n = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(explanations.size(), 1));
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  std::vector<MessageScore> scores;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    scores.push_back(std::move(*out[i]));
  }
  return scores;
}

std::optional<PersonaInstruction> instruction_for(Condition c) {
  if (auto v = condition_persona(c)) return build_instruction(persona_from_vulnerability(*v));
  return std::nullopt;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

StageSeeds derive_seeds(std::uint64_t seed) {
  return {seed, splitmix64(seed ^ 0x73616d706c65ULL), splitmix64(seed ^ 0x61747472ULL)};
}

std::uint64_t message_seed(std::uint64_t attribution_seed, std::string_view message_id) {
  return splitmix64(attribution_seed ^ fnv1a64(message_id));
}

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::Ingest: return "ingest";
    case Stage::Train: return "train";
    case Stage::Predict: return "predict";
    case Stage::Sample: return "sample";
    case Stage::Attribute: return "attribute";
    case Stage::Explain: return "explain";
    case Stage::Evaluate: return "evaluate";
  }
  return "unknown";
}

std::filesystem::path make_run_dir(const std::filesystem::path& root) {
  std::filesystem::create_directories(root);
  const std::string base = "run-" + utc_timestamp();
  for (int n = 1;; ++n) {
    const auto dir = root / (n == 1 ? base : base + "-" + std::to_string(n));
    if (std::filesystem::create_directory(dir)) return dir;
  }
}

RunResult run_pipeline(const RunConfig& config, Stage last) {
  RunResult result;
  const StageSeeds seeds = derive_seeds(config.seed);
  const auto reached = [&](Stage s) { return static_cast<int>(s) <= static_cast<int>(last); };
  std::vector<std::string> completed;
  const auto done = [&](Stage s) {
    completed.emplace_back(stage_name(s));
    spdlog::info("stage {} done", stage_name(s));
  };

  result.run_dir = in_stage(Stage::Ingest, [&] { return make_run_dir(config.output_dir); });
  const auto& dir = result.run_dir;
  spdlog::info("run directory {}", dir.string());

  const MessageSet corpus = in_stage(Stage::Ingest, [&] {
    MessageSet set = load_corpus(config);
    save_messages(dir / "messages.jsonl", set);
    return set;
  });
  spdlog::info("ingested {} messages", corpus.size());
  done(Stage::Ingest);

  std::optional<DetectorModel> model;
  std::map<std::string, Label> predicted;
  MessageSet sample;
  std::vector<Message> explained;
  std::map<std::string, EvidenceSet> evidence;
  std::vector<Explanation> explanations;
  std::string generator = config.mock ? std::string(kMockModelName) : config.llm.model_name;
  std::string nli_name;

  if (reached(Stage::Train)) {
    model = in_stage(Stage::Train, [&] { return obtain_model(config, corpus, dir); });
    done(Stage::Train);
  }

  if (reached(Stage::Predict)) {
    in_stage(Stage::Predict, [&] {
      std::vector<nlohmann::ordered_json> rows;
      std::vector<Label> pred, gold;
      for (const auto& m : corpus.messages()) {
        const Prediction p = predict(*model, m);
        predicted[m.id] = p.predicted_label;
        pred.push_back(p.predicted_label);
        gold.push_back(m.label);
        nlohmann::ordered_json r;
        r["id"] = m.id;
        r["channel"] = channel_name(m.channel);
        r["label"] = label_name(m.label);
        r["predicted"] = label_name(p.predicted_label);
        r["scam_probability"] = p.scam_probability;
        rows.push_back(std::move(r));
      }
      write_jsonl(dir / "predictions.jsonl", rows);
      spdlog::info("corpus macro F1 {:.4f}", macro_f1(pred, gold));
    });
    done(Stage::Predict);
  }

  if (reached(Stage::Sample)) {
    sample = in_stage(Stage::Sample, [&] {
      const auto eligible = filter_for_explanation(corpus, predicted, config.explanation_token_cap);
      if (eligible.size() == 0) {
        throw Error(ErrorCode::InsufficientData, "no correctly detected English scam messages");
      }
      auto s = sample_fraction_per_channel(eligible, config.sample_fraction, seeds.sample);
      save_messages(dir / "sample.jsonl", s);
      spdlog::info("{} eligible messages, {} sampled", eligible.size(), s.size());
      return s;
    });
    done(Stage::Sample);
  }

  if (reached(Stage::Attribute)) {
    in_stage(Stage::Attribute, [&] {
      std::vector<nlohmann::ordered_json> rows;
      for (const auto& m : sample.messages()) {
        EvidenceSet e = attribute(*model, m, config, seeds.attribution);
        if (!scorable(e)) {
          spdlog::warn("message {}: no evidence survives filtering; excluded from all conditions", m.id);
          ++result.skipped_empty_evidence;
          continue;
        }
        rows.push_back(evidence_to_json(m.id, e, message_seed(seeds.attribution, m.id)));
        evidence.emplace(m.id, std::move(e));
        explained.push_back(m);
      }
      write_jsonl(dir / "evidence.jsonl", rows);
      if (explained.empty()) throw Error(ErrorCode::EmptyEvidence, "no message has usable evidence");
    });
    result.explained_messages = explained.size();
    done(Stage::Attribute);
  }

  if (reached(Stage::Explain)) {
    in_stage(Stage::Explain, [&] {
      std::vector<Prompt> prompts;
      for (Condition c : config.conditions) {
        const auto inst = instruction_for(c);
        for (const auto& m : explained) {
          std::optional<EvidenceSet> ev;
          if (uses_evidence(c)) ev = evidence.at(m.id);
          prompts.push_back(build_prompt(c, format_input(m), m.id, ev, inst));
        }
      }
      std::vector<nlohmann::ordered_json> prompt_rows;
      for (const auto& p : prompts) prompt_rows.push_back(to_json(p));
      write_jsonl(dir / "prompts.jsonl", prompt_rows);

      if (config.mock) {
        for (const auto& p : prompts) {
          const auto style = uses_evidence(p.condition) ? MockStyle::EvidenceEchoing : MockStyle::EvidenceBlind;
          explanations.push_back(mock_generate(p, style));
        }
      } else {
        explanations = generate_all(config.llm, prompts);
      }
      std::vector<nlohmann::ordered_json> rows;
      for (const auto& e : explanations) rows.push_back(to_json(e));
      write_jsonl(dir / "explanations.jsonl", rows);
      spdlog::info("{} explanations from {}", explanations.size(), generator);
    });
    done(Stage::Explain);
  }

  if (reached(Stage::Evaluate)) {
    result.report = in_stage(Stage::Evaluate, [&] {
      auto scorer = make_scorer(config);
      nli_name = scorer->name();
      const std::size_t workers = config.nli_mock ? 1 : config.nli.max_in_flight;
      const auto scores = score_all(explanations, evidence, *scorer, config.evaluation, workers);
      std::vector<nlohmann::ordered_json> rows;
      for (const auto& s : scores) rows.push_back(to_json(s));
      write_jsonl(dir / "scores.jsonl", rows);
      MetricReport report = aggregate_report(scores, config.conditions);
      write_text(dir / "report.json", to_json(report).dump(2) + "\n");
      write_text(dir / "report.txt", render_table(report));
      return report;
    });
    done(Stage::Evaluate);
  }

  nlohmann::ordered_json manifest;
  manifest["created_utc"] = utc_timestamp();
  manifest["run_dir"] = dir.string();
  manifest["stages"] = completed;
  manifest["seed"] = config.seed;
  manifest["seeds"] = {{"detector", config.detector.seed},
                       {"split", seeds.split},
                       {"sample", seeds.sample},
                       {"attribution", seeds.attribution}};
  if (config.synthetic && config.corpus.empty()) {
    manifest["synthetic"] = {{"seed", config.synthetic->seed}, {"per_stratum", config.synthetic->per_stratum}};
  }
  manifest["config_hash"] = hex64(fnv1a64(config.source_document.dump()));
  manifest["config"] = config.source_document;
  manifest["generator"] = generator;
  if (!nli_name.empty()) manifest["nli"] = nli_name;
  manifest["versions"] = {{"checkpoint", kCheckpointFormat},
                          {"stopwords", text::kStopwordsVersion},
                          {"persona_bank", kPersonaBankVersion}};
  manifest["counts"] = {{"messages", corpus.size()},
                        {"sampled", sample.size()},
                        {"explained", result.explained_messages},
                        {"skipped_empty_evidence", result.skipped_empty_evidence},
                        {"explanations", explanations.size()}};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  return result;
}

MetricReport report_from_scores(const std::filesystem::path& scores_path,
                                const std::vector<Condition>& conditions) {
  std::vector<MessageScore> scores;
  for (const auto& row : read_jsonl(scores_path)) scores.push_back(message_score_from_json(row));
  return aggregate_report(scores, conditions);
}

ExplainOneResult explain_one(const RunConfig& config, const ExplainOneRequest& request) {
  Message m;
  m.id = "explain-one";
  m.channel = request.channel;
  if (request.channel == Channel::Email) m.subject = request.subject;
  m.body = request.text;
  m.label = Label::Scam;
  m.source = "cli";
  if (text::trim(m.body).empty()) throw Error(ErrorCode::EmptyText, "ingest", "message text is empty");

  const DetectorModel model = in_stage(Stage::Train, [&] {
    const MessageSet corpus = config.train ? load_corpus(config) : MessageSet{};
    return obtain_model(config, corpus, {});
  });

  ExplainOneResult r;
  r.condition = request.persona ? (*request.persona == Vulnerability::HighVulnerability
                                       ? Condition::XaiHighVulnerability
                                       : Condition::XaiLowVulnerability)
                                : Condition::XaiOnly;
  r.prediction = in_stage(Stage::Predict, [&] { return predict(model, m); });
  r.evidence = in_stage(Stage::Attribute, [&] {
    return attribute(model, m, config, derive_seeds(config.seed).attribution);
  });
  r.explanation = in_stage(Stage::Explain, [&] {
    const auto prompt = build_prompt(r.condition, format_input(m), m.id, r.evidence, instruction_for(r.condition));
    return config.mock ? mock_generate(prompt, MockStyle::EvidenceEchoing) : generate(config.llm, prompt);
  });
  return r;
}

void print_explain_one(std::ostream& out, const ExplainOneResult& r) {
  out << fmt::format("prediction: {} (p_scam = {:.4f})\n", label_name(r.prediction.predicted_label),
                     r.prediction.scam_probability);
  if (r.prediction.predicted_label != Label::Scam) {
    out << "note: the detector does not flag this message; the explanation below assumes it did\n";
  }
  out << "condition: " << condition_label(r.condition) << "\n";
  out << "evidence:\n";
  for (const auto& p : r.evidence.phrases) out << fmt::format("  {:<24} {:+.6f}\n", p.word, p.score);
  out << "explanation:\n" << r.explanation.text << "\n";
}

}  // namespace vexa
