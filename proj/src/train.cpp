#include <algorithm>
#include <cmath>

#include "vexa/detector.hpp"
#include "vexa/rng.hpp"

namespace vexa {

namespace {

struct Gradients {
  Matrix embedding;
  Matrix hidden_weights;
  std::vector<double> hidden_bias;
  std::vector<double> output_weights;
  double output_bias = 0.0;

  Gradients(std::size_t vocab, std::size_t d, std::size_t h)
      : embedding(vocab, d), hidden_weights(d, h), hidden_bias(h, 0.0), output_weights(h, 0.0) {}
};

// Accumulates the gradient of the mean binary cross-entropy into `g`.
void accumulate(const DetectorModel& model, const TokenizedInput& input, Label label,
                double scale, Gradients& g) {
  const auto& p = model.params();
  const std::size_t d = model.dim(), h = model.hidden_size();
  const double inv_n = 1.0 / static_cast<double>(input.piece_ids.size());

  std::vector<double> pooled(d, 0.0);
  for (PieceId id : input.piece_ids) {
    auto row = p.embedding.row(id);
    for (std::size_t k = 0; k < d; ++k) pooled[k] += row[k];
  }
  for (double& v : pooled) v *= inv_n;

  std::vector<double> act(h);
  double logit = p.output_bias;
  for (std::size_t j = 0; j < h; ++j) {
    double z = p.hidden_bias[j];
    for (std::size_t k = 0; k < d; ++k) z += pooled[k] * p.hidden_weights(k, j);
    act[j] = model.activation() == Activation::Tanh ? std::tanh(z) : z;
    logit += p.output_weights[j] * act[j];
  }

  const double y = label == Label::Scam ? 1.0 : 0.0;
  const double delta = (logistic(logit) - y) * scale;

  g.output_bias += delta;
  std::vector<double> g_pooled(d, 0.0);
  for (std::size_t j = 0; j < h; ++j) {
    g.output_weights[j] += delta * act[j];
    const double dact = model.activation() == Activation::Tanh ? 1.0 - act[j] * act[j] : 1.0;
    const double g_z = delta * p.output_weights[j] * dact;
    g.hidden_bias[j] += g_z;
    for (std::size_t k = 0; k < d; ++k) {
      g.hidden_weights(k, j) += pooled[k] * g_z;
      g_pooled[k] += p.hidden_weights(k, j) * g_z;
    }
  }
  for (PieceId id : input.piece_ids) {
    auto row = g.embedding.row(id);
    for (std::size_t k = 0; k < d; ++k) row[k] += g_pooled[k] * inv_n;
  }
}

void step(Parameters& p, const Gradients& g, double lr) {
  auto update = [lr](std::vector<double>& w, const std::vector<double>& dw) {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * dw[i];
  };
  update(p.embedding.data(), g.embedding.data());
  update(p.hidden_weights.data(), g.hidden_weights.data());
  update(p.hidden_bias, g.hidden_bias);
  update(p.output_weights, g.output_weights);
  p.output_bias -= lr * g.output_bias;
}

struct Validation {
  double f1 = 0.0;
  double loss = 0.0;  // mean binary cross-entropy
};

Validation evaluate(const DetectorModel& model, const std::vector<TokenizedInput>& inputs,
                    const std::vector<Label>& labels) {
  std::vector<Label> predicted;
  predicted.reserve(inputs.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Prediction p = forward(model, inputs[i]);
    predicted.push_back(p.predicted_label);
    loss -= std::log(labels[i] == Label::Scam ? p.scam_probability : 1.0 - p.scam_probability);
  }
  return {macro_f1(predicted, labels), loss / static_cast<double>(inputs.size())};
}

}  // namespace

void train(DetectorModel& model, const std::vector<TokenizedInput>& train_inputs,
           const std::vector<Label>& train_labels, const std::vector<TokenizedInput>& val_inputs,
           const std::vector<Label>& val_labels, TrainReport* report) {
  if (model.frozen()) throw Error(ErrorCode::FrozenModel, "cannot train a frozen model");
  if (train_inputs.size() != train_labels.size() || val_inputs.size() != val_labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "inputs and labels differ in length");
  }
  if (train_inputs.empty()) throw Error(ErrorCode::CorpusEmpty, "no training examples");

  const auto& sel_inputs = val_inputs.empty() ? train_inputs : val_inputs;
  const auto& sel_labels = val_inputs.empty() ? train_labels : val_labels;
  const TrainConfig& cfg = model.config();
  const double scale = 1.0 / static_cast<double>(train_inputs.size());

  TrainReport local;
  Parameters best = model.params();
  double best_f1 = -1.0;
  double best_loss = 0.0;
  std::size_t since_best = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Gradients g(model.vocab().size(), model.dim(), model.hidden_size());
    for (std::size_t i = 0; i < train_inputs.size(); ++i) {
      accumulate(model, train_inputs[i], train_labels[i], scale, g);
    }
    step(model.mutable_params(), g, cfg.lr);

    const Validation v = evaluate(model, sel_inputs, sel_labels);
    local.val_macro_f1.push_back(v.f1);
    local.val_loss.push_back(v.loss);
    local.epochs_run = epoch;
    // Macro F1 decides; among equal F1 the lower validation loss wins, so a
    // perfect split keeps improving its margins instead of stopping at the
    // first separating epoch.
    if (v.f1 > best_f1 || (v.f1 == best_f1 && v.loss < best_loss)) {
      best_f1 = v.f1;
      best_loss = v.loss;
      best = model.params();
      local.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      local.stopped_early = true;
      break;
    }
  }
  model.mutable_params() = std::move(best);
  local.best_val_macro_f1 = best_f1;
  local.best_val_loss = best_loss;
  if (report) *report = std::move(local);
}

DetectorModel train(const MessageSet& corpus, const TrainConfig& config, TrainReport* report) {
  if (corpus.empty()) throw Error(ErrorCode::CorpusEmpty, "training corpus is empty");
  if (!(config.val_fraction > 0.0 && config.val_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "val_fraction must be in (0, 1)");
  }
  std::vector<std::size_t> by_label[2];
  const auto& msgs = corpus.messages();
  for (std::size_t i = 0; i < msgs.size(); ++i) {
    by_label[msgs[i].label == Label::Scam ? 0 : 1].push_back(i);
  }
  if (by_label[0].empty() || by_label[1].empty()) {
    throw Error(ErrorCode::SingleClassCorpus, "training corpus needs both scam and ham messages");
  }

  // Stratified train/validation split.
  Rng rng(config.seed);
  std::vector<std::size_t> train_idx, val_idx;
  for (auto& idx : by_label) {
    rng.shuffle(std::span<std::size_t>(idx));
    auto n_val = static_cast<std::size_t>(std::llround(config.val_fraction * static_cast<double>(idx.size())));
    n_val = std::min(n_val, idx.size() - 1);
    val_idx.insert(val_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
    train_idx.insert(train_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(val_idx.begin(), val_idx.end());

  std::vector<Message> train_msgs;
  for (auto i : train_idx) train_msgs.push_back(msgs[i]);
  const Vocab vocab = build_vocab(MessageSet(train_msgs), config.vocab_size);

  auto prepare = [&](const std::vector<std::size_t>& idx, std::vector<TokenizedInput>& inputs,
                     std::vector<Label>& labels) {
    for (auto i : idx) {
      inputs.push_back(tokenize(format_input(msgs[i]), vocab, config.token_limit));
      labels.push_back(msgs[i].label);
    }
  };
  std::vector<TokenizedInput> tr_in, va_in;
  std::vector<Label> tr_lab, va_lab;
  prepare(train_idx, tr_in, tr_lab);
  prepare(val_idx, va_in, va_lab);

  DetectorModel model(vocab, config);
  train(model, tr_in, tr_lab, va_in, va_lab, report);
  return model;
}

}  // namespace vexa
