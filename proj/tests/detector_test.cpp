#include <chrono>
#include <cmath>
#include <fstream>

#include "doctest.h"
#include "vexa/detector.hpp"
#include "vexa/rng.hpp"

using namespace vexa;

namespace {

DetectorModel random_model(std::uint64_t seed, std::size_t d = 5, std::size_t h = 4,
                           Activation act = Activation::Tanh) {
  TrainConfig cfg;
  cfg.d = d;
  cfg.h = h;
  cfg.seed = seed;
  Vocab vocab({"a", "b", "c", "d", "e", "ab", "cd", "abc"});
  DetectorModel model(vocab, cfg, act);
  Rng rng(seed * 7919 + 1);
  auto& p = model.mutable_params();
  for (double& x : p.embedding.data()) x = rng.uniform(-1, 1);
  for (double& x : p.hidden_weights.data()) x = rng.uniform(-1, 1);
  for (double& x : p.hidden_bias) x = rng.uniform(-1, 1);
  for (double& x : p.output_weights) x = rng.uniform(-1, 1);
  p.output_bias = rng.uniform(-1, 1);
  return model;
}

Matrix random_embeddings(Rng& rng, std::size_t n, std::size_t d) {
  Matrix x(n, d);
  for (double& v : x.data()) v = rng.uniform(-1, 1);
  return x;
}

// Central finite differences of the logit, one coordinate at a time.
Matrix finite_difference_grad(const DetectorModel& model, const Matrix& x, double step) {
  Matrix g(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t k = 0; k < x.cols(); ++k) {
      Matrix plus = x, minus = x;
      plus(i, k) += step;
      minus(i, k) -= step;
      g(i, k) = (logit_from_embeddings(model, plus) - logit_from_embeddings(model, minus)) / (2 * step);
    }
  }
  return g;
}

double max_relative_error(const Matrix& a, const Matrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    const double x = a.data()[i], y = b.data()[i];
    const double denom = std::max({std::abs(x), std::abs(y), 1e-8});
    worst = std::max(worst, std::abs(x - y) / denom);
  }
  return worst;
}

TokenizedInput input_of(std::vector<PieceId> ids) {
  TokenizedInput in;
  in.piece_ids = std::move(ids);
  for (std::size_t i = 0; i < in.piece_ids.size(); ++i) {
    in.alignment.push_back(i);
    in.words.push_back("w" + std::to_string(i));
  }
  return in;
}

}  // namespace

TEST_CASE("build_vocab keeps frequent n-grams and every character") {
  std::vector<Message> msgs;
  for (int i = 0; i < 50; ++i) {
    msgs.push_back({.id = "f" + std::to_string(i), .channel = Channel::SMS, .subject = {},
                    .body = "free", .label = Label::Scam});
  }
  msgs.push_back({.id = "x", .channel = Channel::SMS, .subject = {}, .body = "quiz", .label = Label::Ham});
  const MessageSet corpus(msgs);
  const auto vocab = build_vocab(corpus, 40);
  CHECK(vocab.contains("free"));
  for (auto c : {"f", "r", "e", "q", "u", "i", "z"}) CHECK(vocab.contains(c));
  CHECK(vocab.find(Vocab::kPadPiece) == Vocab::kPad);
  CHECK(vocab.contains("<Email>"));
  CHECK(vocab == build_vocab(corpus, 40));

  // 5 specials + 7 characters leaves no room.
  try {
    build_vocab(corpus, 12);
    FAIL("expected VocabTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::VocabTooSmall);
  }
  CHECK_THROWS_AS(build_vocab(MessageSet{}, 100), Error);
}

TEST_CASE("tokenize segments greedily by longest match") {
  const Vocab vocab({"w", "i", "n", "e", "r", "win", "ner"});
  const auto t = tokenize({"winner", ""}, vocab);
  REQUIRE(t.piece_ids.size() == 2);
  CHECK(vocab.piece(t.piece_ids[0]) == "win");
  CHECK(vocab.piece(t.piece_ids[1]) == "ner");
  CHECK(t.alignment == std::vector<std::size_t>{0, 0});

  const auto marker_only = tokenize({"<SMS> ", "<SMS>"}, vocab);
  CHECK(marker_only.piece_ids == std::vector<PieceId>{*vocab.find("<SMS>")});

  // No multi-character piece matches, so every character falls back alone.
  const auto fallback = tokenize({"<SMS> rein", "<SMS>"}, vocab);
  CHECK(fallback.piece_ids.size() == 5);
  for (auto id : fallback.piece_ids) CHECK(id != Vocab::kUnk);
  CHECK(fallback.alignment == std::vector<std::size_t>{0, 1, 1, 1, 1});

  const auto unknown = tokenize({"zq", ""}, vocab);
  CHECK(unknown.piece_ids == std::vector<PieceId>{Vocab::kUnk, Vocab::kUnk});
}

TEST_CASE("tokenize truncates from the front and keeps alignment consistent") {
  const Vocab vocab({"a", "b", "c"});
  const auto full = tokenize({"<SMS> aa bb cc", "<SMS>"}, vocab, 512);
  const auto cut = tokenize({"<SMS> aa bb cc", "<SMS>"}, vocab, 3);
  CHECK(full.piece_ids.size() == 7);
  CHECK(cut.piece_ids == std::vector<PieceId>(full.piece_ids.end() - 3, full.piece_ids.end()));
  CHECK(cut.alignment == std::vector<std::size_t>{2, 3, 3});
  CHECK(cut.words.size() == 4);
}

TEST_CASE("tokenized alignment is total and non-decreasing") {
  const auto corpus = synth_corpus(2, 10);
  const auto vocab = build_vocab(corpus, 300);
  for (const auto& m : corpus.messages()) {
    const auto t = tokenize(format_input(m), vocab);
    REQUIRE(t.alignment.size() == t.piece_ids.size());
    for (std::size_t i = 1; i < t.alignment.size(); ++i) CHECK(t.alignment[i - 1] <= t.alignment[i]);
    std::vector<bool> hit(t.words.size(), false);
    for (auto w : t.alignment) hit.at(w) = true;
    for (bool b : hit) CHECK(b);
  }
}

TEST_CASE("forward with all-zero weights gives probability one half") {
  auto model = random_model(1);
  auto& p = model.mutable_params();
  std::fill(p.embedding.data().begin(), p.embedding.data().end(), 0.0);
  std::fill(p.hidden_weights.data().begin(), p.hidden_weights.data().end(), 0.0);
  std::fill(p.hidden_bias.begin(), p.hidden_bias.end(), 0.0);
  std::fill(p.output_weights.begin(), p.output_weights.end(), 0.0);
  p.output_bias = 0.0;
  const auto pr = forward(model, input_of({2, 5, 6}));
  CHECK(pr.scam_probability == 0.5);
  CHECK(pr.logit == 0.0);
  CHECK(pr.predicted_label == Label::Scam);
}

TEST_CASE("forward is deterministic and validates ids") {
  const auto model = random_model(2);
  const auto in = input_of({5, 6, 7, 12});
  const auto a = forward(model, in), b = forward(model, in);
  CHECK(a.logit == b.logit);
  CHECK(a.scam_probability == b.scam_probability);
  CHECK(a.scam_probability == doctest::Approx(1.0 / (1.0 + std::exp(-a.logit))).epsilon(1e-15));
  try {
    forward(model, input_of({5, 999}));
    FAIL("expected IndexOutOfVocab");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IndexOutOfVocab);
  }
}

TEST_CASE("forward probability stays strictly inside (0, 1)") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto model = random_model(100 + trial);
    std::vector<PieceId> ids(1 + rng.below(10));
    for (auto& id : ids) id = static_cast<PieceId>(rng.below(model.vocab().size()));
    const auto pr = forward(model, input_of(ids));
    CHECK(pr.scam_probability > 0.0);
    CHECK(pr.scam_probability < 1.0);
    CHECK((pr.predicted_label == Label::Scam) == (pr.scam_probability >= 0.5));
  }
  CHECK(logistic(800.0) < 1.0);
  CHECK(logistic(-800.0) > 0.0);
}

TEST_CASE("gradient matches central finite differences") {
  Rng rng(20);
  for (int trial = 0; trial < 20; ++trial) {
    const auto model = random_model(trial + 1);
    const auto x = random_embeddings(rng, 1 + rng.below(8), model.dim());
    const auto analytic = grad_wrt_embeddings(model, x);
    const auto numeric = finite_difference_grad(model, x, 1e-4);
    CHECK(max_relative_error(analytic, numeric) < 1e-4);
  }
}

TEST_CASE("gradient is zero when the output weights are zero") {
  auto model = random_model(4);
  auto& w = model.mutable_params().output_weights;
  std::fill(w.begin(), w.end(), 0.0);
  Rng rng(4);
  const auto g = grad_wrt_embeddings(model, random_embeddings(rng, 6, model.dim()));
  for (double v : g.data()) CHECK(v == 0.0);
}

TEST_CASE("linear model gradient equals the weight composition over length") {
  const auto model = random_model(5, 5, 4, Activation::Identity);
  Rng rng(5);
  const std::size_t n = 7;
  const auto g = grad_wrt_embeddings(model, random_embeddings(rng, n, model.dim()));
  const auto& p = model.params();
  for (std::size_t k = 0; k < model.dim(); ++k) {
    double expected = 0.0;
    for (std::size_t j = 0; j < model.hidden_size(); ++j) expected += p.hidden_weights(k, j) * p.output_weights[j];
    expected /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) CHECK(g(i, k) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("gradient rejects non-finite weights") {
  auto model = random_model(6);
  model.mutable_params().hidden_weights(0, 0) = std::nan("");
  Rng rng(6);
  try {
    grad_wrt_embeddings(model, random_embeddings(rng, 2, model.dim()));
    FAIL("expected NonFiniteWeights");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteWeights);
  }
}

TEST_CASE("macro_f1 hand-computed cases") {
  using L = Label;
  const std::vector<L> actual = {L::Scam, L::Scam, L::Ham, L::Ham};
  CHECK(macro_f1(actual, actual) == 1.0);
  // Scam F1 = 2*2/(2*2+2) = 2/3, Ham F1 = 0.
  const std::vector<L> all_scam(4, L::Scam);
  CHECK(macro_f1(all_scam, actual) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  // Ham absent from both lists contributes 0.
  CHECK(macro_f1(all_scam, all_scam) == 0.5);

  auto code_of = [](std::span<const L> a, std::span<const L> b) {
    try {
      macro_f1(a, b);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code_of({}, {}) == ErrorCode::LengthMismatch);
  CHECK(code_of(all_scam, std::span<const L>(actual).first(3)) == ErrorCode::LengthMismatch);
}

TEST_CASE("macro_f1 is symmetric under label renaming") {
  Rng rng(8);
  auto flip = [](std::vector<Label> v) {
    for (auto& l : v) l = l == Label::Scam ? Label::Ham : Label::Scam;
    return v;
  };
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(20);
    std::vector<Label> p(n), a(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = rng.below(2) ? Label::Scam : Label::Ham;
      a[i] = rng.below(2) ? Label::Scam : Label::Ham;
    }
    CHECK(macro_f1(p, a) == doctest::Approx(macro_f1(flip(p), flip(a))).epsilon(1e-15));
  }
}

TEST_CASE("training on the synthetic corpus separates scam from ham") {
  const auto corpus = synth_corpus(7, 100);
  TrainConfig cfg;
  cfg.seed = 7;
  TrainReport report;
  const auto start = std::chrono::steady_clock::now();
  const auto model = train(corpus, cfg, &report);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  MESSAGE("epochs=" << report.epochs_run << " best=" << report.best_epoch
                    << " f1=" << report.best_val_macro_f1 << " secs=" << secs);
  CHECK(report.best_val_macro_f1 >= 0.90);
  CHECK_FALSE(model.frozen());

  // The kept checkpoint has the lowest loss among the best-F1 epochs.
  REQUIRE(report.val_loss.size() == report.epochs_run);
  double min_loss = 1e300;
  for (std::size_t e = 0; e < report.epochs_run; ++e) {
    if (report.val_macro_f1[e] == report.best_val_macro_f1) min_loss = std::min(min_loss, report.val_loss[e]);
  }
  CHECK(report.best_val_loss == min_loss);
  CHECK(report.val_loss[report.best_epoch - 1] == min_loss);

  Message probe{.id = "p", .channel = Channel::SMS, .subject = {},
                .body = "URGENT: you have won a $1000 prize. click the link at bit.ly/abcdef before it expires.",
                .label = Label::Scam};
  CHECK(predict(model, probe).predicted_label == Label::Scam);

  const auto again = train(corpus, cfg);
  CHECK(again.params() == model.params());
}

TEST_CASE("early stopping halts on a plateau") {
  const auto corpus = synth_corpus(7, 20);
  TrainConfig cfg;
  cfg.lr = 0.0;  // validation F1 never moves
  cfg.epochs = 100;
  cfg.patience = 3;
  TrainReport report;
  train(corpus, cfg, &report);
  CHECK(report.stopped_early);
  CHECK(report.epochs_run == 4);
  CHECK(report.best_epoch == 1);
}

TEST_CASE("training needs both classes") {
  std::vector<Message> msgs = {
      {.id = "a", .channel = Channel::SMS, .subject = {}, .body = "hi", .label = Label::Ham},
      {.id = "b", .channel = Channel::SMS, .subject = {}, .body = "yo", .label = Label::Ham}};
  try {
    train(MessageSet(msgs), TrainConfig{});
    FAIL("expected SingleClassCorpus");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingleClassCorpus);
  }
}

TEST_CASE("freeze blocks training and leaves outputs untouched") {
  auto model = random_model(9);
  const auto in = input_of({5, 6});
  const auto before = forward(model, in);
  auto frozen = freeze(model);
  CHECK(frozen.frozen());
  CHECK(freeze(frozen).frozen());
  CHECK(forward(frozen, in).logit == before.logit);
  CHECK(frozen.params() == model.params());
  try {
    train(frozen, {in}, {Label::Scam}, {}, {});
    FAIL("expected FrozenModel");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FrozenModel);
  }
  CHECK_THROWS_AS(frozen.mutable_params(), Error);
}

TEST_CASE("checkpoint round trip is bit-exact") {
  const auto model = freeze(random_model(10));
  const auto path = std::filesystem::temp_directory_path() / "vexa_model_test.json";
  save_model(model, path);
  const auto loaded = load_model(path);
  CHECK(loaded.frozen());
  CHECK(loaded.params() == model.params());
  CHECK(loaded.vocab() == model.vocab());
  const auto in = input_of({3, 5, 7, 11});
  CHECK(forward(loaded, in).logit == forward(model, in).logit);
  CHECK(forward(loaded, in).scam_probability == forward(model, in).scam_probability);

  {
    std::ofstream out(path);
    out << R"({"format":"something-else"})";
  }
  try {
    load_model(path);
    FAIL("expected BadCheckpoint");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadCheckpoint);
  }
  std::filesystem::remove(path);
}
