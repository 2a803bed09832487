#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vexa/corpus.hpp"

namespace vexa {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

using PieceId = std::uint32_t;

class Vocab {
 public:
  static constexpr PieceId kPad = 0;
  static constexpr PieceId kUnk = 1;
  static constexpr std::string_view kPadPiece = "<PAD>";
  static constexpr std::string_view kUnkPiece = "<UNK>";
  static constexpr std::size_t kNumSpecials = 5;  // PAD, UNK, three channel markers
  static constexpr std::size_t kMaxNgram = 4;

  Vocab();
  // Specials are added first; `pieces` may or may not include them.
  explicit Vocab(const std::vector<std::string>& pieces);

  std::size_t size() const { return pieces_.size(); }
  const std::vector<std::string>& pieces() const { return pieces_; }
  const std::string& piece(PieceId id) const { return pieces_.at(id); }
  std::optional<PieceId> find(std::string_view piece) const;
  bool contains(std::string_view piece) const { return find(piece).has_value(); }

  bool operator==(const Vocab& o) const { return pieces_ == o.pieces_; }

 private:
  void add(std::string piece);

  std::vector<std::string> pieces_;
  std::unordered_map<std::string, PieceId> index_;
};

// Most frequent character n-grams (n = 1..4, lowercased words) up to
// max_size, after the specials and every observed single character.
Vocab build_vocab(const MessageSet& corpus, std::size_t max_size);

struct TokenizedInput {
  std::vector<PieceId> piece_ids;
  std::vector<std::size_t> alignment;  // piece position -> word position
  std::vector<std::string> words;      // whitespace words of the formatted text
};

inline constexpr std::size_t kDefaultTokenLimit = 512;

TokenizedInput tokenize(const FormattedText& text, const Vocab& vocab,
                        std::size_t limit = kDefaultTokenLimit);

enum class Activation { Tanh, Identity };

struct TrainConfig {
  double lr = 2.0;
  std::size_t epochs = 400;
  std::size_t patience = 25;
  std::size_t d = 16;
  std::size_t h = 8;
  double val_fraction = 0.2;
  std::uint64_t seed = 7;
  std::size_t vocab_size = 1000;
  std::size_t token_limit = kDefaultTokenLimit;
};

struct Parameters {
  Matrix embedding;        // vocab x d
  Matrix hidden_weights;   // d x h
  std::vector<double> hidden_bias;     // h
  std::vector<double> output_weights;  // h
  double output_bias = 0.0;

  bool operator==(const Parameters&) const = default;
};

// Mean-pooled piece embeddings -> one hidden layer -> scam logit.
class DetectorModel {
 public:
  // Weights drawn uniformly from [-0.1, 0.1] using config.seed.
  DetectorModel(Vocab vocab, TrainConfig config, Activation activation = Activation::Tanh);

  const Vocab& vocab() const { return vocab_; }
  const TrainConfig& config() const { return config_; }
  Activation activation() const { return activation_; }
  std::size_t dim() const { return config_.d; }
  std::size_t hidden_size() const { return config_.h; }

  const Parameters& params() const { return params_; }
  // Throws FrozenModel once the model is frozen.
  Parameters& mutable_params();

  bool frozen() const { return frozen_; }
  void freeze() { frozen_ = true; }

 private:
  friend DetectorModel load_model(const std::filesystem::path& path);

  Vocab vocab_;
  TrainConfig config_;
  Activation activation_;
  Parameters params_;
  bool frozen_ = false;
};

struct Prediction {
  double scam_probability = 0.5;
  Label predicted_label = Label::Scam;
  double logit = 0.0;
};

// Piece embeddings of the input, one row per piece.
Matrix embed(const DetectorModel& model, const TokenizedInput& input);

// Scam logit for an explicit embedding sequence (rows = pieces).
double logit_from_embeddings(const DetectorModel& model, const Matrix& piece_embeddings);

Prediction forward(const DetectorModel& model, const TokenizedInput& input);
Prediction predict(const DetectorModel& model, const Message& message);

// Exact gradient of the scam logit with respect to every coordinate of
// every piece embedding.
Matrix grad_wrt_embeddings(const DetectorModel& model, const Matrix& piece_embeddings);

double logistic(double x);

struct TrainReport {
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  double best_val_macro_f1 = 0.0;
  bool stopped_early = false;
  double best_val_loss = 0.0;
  std::vector<double> val_macro_f1;  // per epoch
  std::vector<double> val_loss;      // per epoch
};

// Builds a vocabulary from the training split, initialises weights from
// config.seed and trains with full-batch gradient descent and early stopping
// on validation macro F1 (ties broken by lower validation loss). Returns the
// best validation checkpoint, unfrozen.
DetectorModel train(const MessageSet& corpus, const TrainConfig& config,
                    TrainReport* report = nullptr);

// Continues training an existing model on pre-tokenised data.
void train(DetectorModel& model, const std::vector<TokenizedInput>& train_inputs,
           const std::vector<Label>& train_labels, const std::vector<TokenizedInput>& val_inputs,
           const std::vector<Label>& val_labels, TrainReport* report = nullptr);

double macro_f1(std::span<const Label> predicted, std::span<const Label> actual);

DetectorModel freeze(DetectorModel model);

inline constexpr std::string_view kCheckpointFormat = "vexa-detector-v1";

void save_model(const DetectorModel& model, const std::filesystem::path& path);
DetectorModel load_model(const std::filesystem::path& path);

}  // namespace vexa
