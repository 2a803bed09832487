#include "vexa/detector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "vexa/rng.hpp"

namespace vexa {

namespace {

double activate(Activation a, double z) { return a == Activation::Tanh ? std::tanh(z) : z; }

// Derivative expressed through the activation output.
double activate_grad(Activation a, double out) {
  return a == Activation::Tanh ? 1.0 - out * out : 1.0;
}

bool all_finite(std::span<const double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

void check_ids(const DetectorModel& model, const TokenizedInput& input) {
  if (input.piece_ids.empty()) {
    throw Error(ErrorCode::InvalidArgument, "input has no pieces");
  }
  for (PieceId id : input.piece_ids) {
    if (id >= model.vocab().size()) {
      throw Error(ErrorCode::IndexOutOfVocab,
                  "piece id " + std::to_string(id) + " outside vocabulary of size " +
                      std::to_string(model.vocab().size()));
    }
  }
}

struct HiddenState {
  std::vector<double> pooled;  // d
  std::vector<double> act;     // h
  double logit = 0.0;
};

HiddenState run_from_pooled(const DetectorModel& model, std::vector<double> pooled) {
  const auto& p = model.params();
  const std::size_t d = model.dim(), h = model.hidden_size();
  HiddenState s;
  s.pooled = std::move(pooled);
  s.act.assign(h, 0.0);
  s.logit = p.output_bias;
  for (std::size_t j = 0; j < h; ++j) {
    double z = p.hidden_bias[j];
    for (std::size_t k = 0; k < d; ++k) z += s.pooled[k] * p.hidden_weights(k, j);
    s.act[j] = activate(model.activation(), z);
    s.logit += p.output_weights[j] * s.act[j];
  }
  return s;
}

std::vector<double> mean_pool(const DetectorModel& model, const TokenizedInput& input) {
  const auto& emb = model.params().embedding;
  std::vector<double> pooled(model.dim(), 0.0);
  for (PieceId id : input.piece_ids) {
    auto row = emb.row(id);
    for (std::size_t k = 0; k < pooled.size(); ++k) pooled[k] += row[k];
  }
  const double inv = 1.0 / static_cast<double>(input.piece_ids.size());
  for (double& v : pooled) v *= inv;
  return pooled;
}

Prediction to_prediction(double logit) {
  Prediction pr;
  pr.logit = logit;
  pr.scam_probability = logistic(logit);
  pr.predicted_label = pr.scam_probability >= 0.5 ? Label::Scam : Label::Ham;
  return pr;
}

}  // namespace

double logistic(double x) {
  double p = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  // keep the probability strictly inside (0, 1) even when the logit saturates
  constexpr double lo = std::numeric_limits<double>::min();
  return std::clamp(p, lo, std::nextafter(1.0, 0.0));
}

DetectorModel::DetectorModel(Vocab vocab, TrainConfig config, Activation activation)
    : vocab_(std::move(vocab)), config_(config), activation_(activation) {
  if (config_.d < 2 || config_.h < 1) {
    throw Error(ErrorCode::InvalidArgument, "detector needs d >= 2 and h >= 1");
  }
  Rng rng(config_.seed);
  auto init = [&](std::vector<double>& xs) {
    for (double& x : xs) x = rng.uniform(-0.1, 0.1);
  };
  params_.embedding = Matrix(vocab_.size(), config_.d);
  params_.hidden_weights = Matrix(config_.d, config_.h);
  params_.hidden_bias.assign(config_.h, 0.0);
  params_.output_weights.assign(config_.h, 0.0);
  init(params_.embedding.data());
  init(params_.hidden_weights.data());
  init(params_.hidden_bias);
  init(params_.output_weights);
  params_.output_bias = rng.uniform(-0.1, 0.1);
}

Parameters& DetectorModel::mutable_params() {
  if (frozen_) throw Error(ErrorCode::FrozenModel, "model is frozen");
  return params_;
}

Matrix embed(const DetectorModel& model, const TokenizedInput& input) {
  check_ids(model, input);
  Matrix out(input.piece_ids.size(), model.dim());
  const auto& emb = model.params().embedding;
  for (std::size_t i = 0; i < input.piece_ids.size(); ++i) {
    std::ranges::copy(emb.row(input.piece_ids[i]), out.row(i).begin());
  }
  return out;
}

double logit_from_embeddings(const DetectorModel& model, const Matrix& x) {
  if (x.rows() == 0 || x.cols() != model.dim()) {
    throw Error(ErrorCode::InvalidArgument, "embedding matrix has the wrong shape");
  }
  std::vector<double> pooled(model.dim(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t k = 0; k < pooled.size(); ++k) pooled[k] += x(i, k);
  }
  for (double& v : pooled) v /= static_cast<double>(x.rows());
  return run_from_pooled(model, std::move(pooled)).logit;
}

Prediction forward(const DetectorModel& model, const TokenizedInput& input) {
  check_ids(model, input);
  return to_prediction(run_from_pooled(model, mean_pool(model, input)).logit);
}

Prediction predict(const DetectorModel& model, const Message& message) {
  return forward(model, tokenize(format_input(message), model.vocab(), model.config().token_limit));
}

Matrix grad_wrt_embeddings(const DetectorModel& model, const Matrix& x) {
  const auto& p = model.params();
  if (!all_finite(p.hidden_weights.data()) || !all_finite(p.hidden_bias) ||
      !all_finite(p.output_weights) || !std::isfinite(p.output_bias)) {
    throw Error(ErrorCode::NonFiniteWeights, "detector weights contain NaN or Inf");
  }
  if (x.rows() == 0 || x.cols() != model.dim()) {
    throw Error(ErrorCode::InvalidArgument, "embedding matrix has the wrong shape");
  }
  const std::size_t n = x.rows(), d = model.dim(), h = model.hidden_size();
  std::vector<double> pooled(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) pooled[k] += x(i, k);
  }
  for (double& v : pooled) v /= static_cast<double>(n);
  const HiddenState s = run_from_pooled(model, std::move(pooled));

  // d logit / d pooled, then spread evenly over the n positions.
  std::vector<double> g_pooled(d, 0.0);
  for (std::size_t j = 0; j < h; ++j) {
    const double g_z = p.output_weights[j] * activate_grad(model.activation(), s.act[j]);
    for (std::size_t k = 0; k < d; ++k) g_pooled[k] += p.hidden_weights(k, j) * g_z;
  }
  Matrix grad(n, d);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) grad(i, k) = g_pooled[k] * inv_n;
  }
  return grad;
}

double macro_f1(std::span<const Label> predicted, std::span<const Label> actual) {
  if (predicted.size() != actual.size() || predicted.empty()) {
    throw Error(ErrorCode::LengthMismatch,
                "macro_f1 needs equal, non-empty lists (got " + std::to_string(predicted.size()) +
                    " and " + std::to_string(actual.size()) + ")");
  }
  double total = 0.0;
  for (Label cls : {Label::Scam, Label::Ham}) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
      const bool p = predicted[i] == cls, a = actual[i] == cls;
      tp += p && a;
      fp += p && !a;
      fn += !p && a;
    }
    const std::size_t denom = 2 * tp + fp + fn;
    // a class absent from both lists scores 0
    total += denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
  }
  return total / 2.0;
}

DetectorModel freeze(DetectorModel model) {
  model.freeze();
  return model;
}

}  // namespace vexa
