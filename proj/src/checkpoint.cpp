#include <fstream>

#include <nlohmann/json.hpp>

#include "vexa/detector.hpp"

namespace vexa {

namespace {

using ojson = nlohmann::ordered_json;

ojson matrix_json(const Matrix& m) {
  return ojson{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

Matrix matrix_from(const nlohmann::json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != m.data().size()) {
    throw Error(ErrorCode::BadCheckpoint, "matrix data does not match its shape");
  }
  m.data() = std::move(data);
  return m;
}

}  // namespace

void save_model(const DetectorModel& model, const std::filesystem::path& path) {
  const auto& c = model.config();
  const auto& p = model.params();
  ojson j;
  j["format"] = kCheckpointFormat;
  j["seed"] = c.seed;
  j["config"] = ojson{{"lr", c.lr},
                      {"epochs", c.epochs},
                      {"patience", c.patience},
                      {"d", c.d},
                      {"h", c.h},
                      {"val_fraction", c.val_fraction},
                      {"seed", c.seed},
                      {"vocab_size", c.vocab_size},
                      {"token_limit", c.token_limit}};
  j["activation"] = model.activation() == Activation::Tanh ? "tanh" : "identity";
  j["frozen"] = model.frozen();
  j["vocab"] = model.vocab().pieces();
  j["embedding"] = matrix_json(p.embedding);
  j["hidden_weights"] = matrix_json(p.hidden_weights);
  j["hidden_bias"] = p.hidden_bias;
  j["output_weights"] = p.output_weights;
  j["output_bias"] = p.output_bias;

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << j.dump() << '\n';
}

DetectorModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open model file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    if (j.at("format").get<std::string>() != kCheckpointFormat) {
      throw Error(ErrorCode::BadCheckpoint,
                  path.string() + " is not a " + std::string(kCheckpointFormat) + " checkpoint");
    }
    const auto& jc = j.at("config");
    TrainConfig c;
    c.lr = jc.at("lr").get<double>();
    c.epochs = jc.at("epochs").get<std::size_t>();
    c.patience = jc.at("patience").get<std::size_t>();
    c.d = jc.at("d").get<std::size_t>();
    c.h = jc.at("h").get<std::size_t>();
    c.val_fraction = jc.at("val_fraction").get<double>();
    c.seed = jc.at("seed").get<std::uint64_t>();
    c.vocab_size = jc.at("vocab_size").get<std::size_t>();
    c.token_limit = jc.at("token_limit").get<std::size_t>();
    const auto act = j.at("activation").get<std::string>() == "identity" ? Activation::Identity
                                                                         : Activation::Tanh;
    Vocab vocab(j.at("vocab").get<std::vector<std::string>>());

    DetectorModel model(std::move(vocab), c, act);
    Parameters p;
    p.embedding = matrix_from(j.at("embedding"));
    p.hidden_weights = matrix_from(j.at("hidden_weights"));
    p.hidden_bias = j.at("hidden_bias").get<std::vector<double>>();
    p.output_weights = j.at("output_weights").get<std::vector<double>>();
    p.output_bias = j.at("output_bias").get<double>();
    if (p.embedding.rows() != model.vocab().size() || p.embedding.cols() != c.d ||
        p.hidden_weights.rows() != c.d || p.hidden_weights.cols() != c.h ||
        p.hidden_bias.size() != c.h || p.output_weights.size() != c.h) {
      throw Error(ErrorCode::BadCheckpoint, "weight shapes do not match the stored config");
    }
    model.params_ = std::move(p);
    model.frozen_ = j.at("frozen").get<bool>();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadCheckpoint, path.string() + ": " + e.what());
  }
}

}  // namespace vexa
