#include "bbgan/neural.hpp"

#include <openssl/evp.h>

#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <nlohmann/json.hpp>

#include "bbgan/error.hpp"

namespace bbgan {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Tanh: return "tanh";
    case Activation::LeakyRelu: return "leaky_relu";
    case Activation::Sigmoid: return "sigmoid";
  }
  return "identity";
}

Activation parse_activation(std::string_view name) {
  if (name == "identity") return Activation::Identity;
  if (name == "tanh") return Activation::Tanh;
  if (name == "leaky_relu") return Activation::LeakyRelu;
  if (name == "sigmoid") return Activation::Sigmoid;
  throw CorruptionError("unknown activation '" + std::string(name) + "'");
}

namespace {

Eigen::MatrixXd apply(Activation a, const Eigen::MatrixXd& z) {
  switch (a) {
    case Activation::Identity: return z;
    case Activation::Tanh: return z.array().tanh().matrix();
    case Activation::LeakyRelu: return z.unaryExpr([](double v) { return v > 0.0 ? v : kLeakySlope * v; });
    case Activation::Sigmoid: return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  }
  return z;
}

// dAct/dz from the pre-activation z and the output a.
Eigen::MatrixXd derivative(Activation act, const Eigen::MatrixXd& z, const Eigen::MatrixXd& a) {
  switch (act) {
    case Activation::Identity: return Eigen::MatrixXd::Ones(z.rows(), z.cols());
    case Activation::Tanh: return (1.0 - a.array().square()).matrix();
    case Activation::LeakyRelu: return z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : kLeakySlope; });
    case Activation::Sigmoid: return (a.array() * (1.0 - a.array())).matrix();
  }
  return Eigen::MatrixXd::Ones(z.rows(), z.cols());
}

}  // namespace

std::uint64_t Mlp::next_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw DimensionError("an MLP needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.weights.cols() != layer.bias.size()) {
      throw DimensionError("layer " + std::to_string(l) + " bias does not match its weight columns");
    }
    if (l > 0 && layers_[l - 1].weights.cols() != layer.weights.rows()) {
      throw DimensionError("layer " + std::to_string(l) + " input does not chain with layer " +
                           std::to_string(l - 1) + " output");
    }
  }
}

Mlp::Mlp(const Mlp& other) : layers_(other.layers_), id_(next_id()), version_(0) {}

Mlp& Mlp::operator=(const Mlp& other) {
  if (this != &other) {
    layers_ = other.layers_;
    ++version_;
  }
  return *this;
}

Mlp Mlp::create(std::size_t input, std::span<const std::size_t> hidden, std::size_t output,
                Activation hidden_activation, Activation output_activation, SeededSampler& rng) {
  std::vector<std::size_t> dims{input};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(output);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    if (dims[l] == 0 || dims[l + 1] == 0) throw DimensionError("layer widths must be positive");
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims[l]));
    DenseLayer layer;
    layer.weights.resize(static_cast<Eigen::Index>(dims[l]), static_cast<Eigen::Index>(dims[l + 1]));
    layer.bias.resize(static_cast<Eigen::Index>(dims[l + 1]));
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = rng.uniform(-bound, bound);
    }
    for (Eigen::Index c = 0; c < layer.bias.size(); ++c) layer.bias(c) = rng.uniform(-bound, bound);
    layer.activation = l + 2 == dims.size() ? output_activation : hidden_activation;
    layers.push_back(std::move(layer));
  }
  return Mlp(std::move(layers));
}

std::size_t Mlp::input_dim() const {
  return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.front().weights.rows());
}

std::size_t Mlp::output_dim() const {
  return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.back().weights.cols());
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

std::vector<DenseLayer>& Mlp::mutable_layers() {
  ++version_;
  return layers_;
}

void Mlp::check_input(const Eigen::MatrixXd& batch) const {
  if (layers_.empty()) throw DimensionError("forward on an empty network");
  if (static_cast<std::size_t>(batch.cols()) != input_dim()) {
    throw DimensionError("batch has " + std::to_string(batch.cols()) + " columns, network expects " +
                         std::to_string(input_dim()));
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& batch) const {
  check_input(batch);
  Eigen::MatrixXd x = batch;
  for (const auto& layer : layers_) {
    Eigen::MatrixXd z = x * layer.weights;
    z.rowwise() += layer.bias.transpose();
    x = apply(layer.activation, z);
  }
  return x;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& batch, Cache& cache) const {
  check_input(batch);
  cache.activations.assign(1, batch);
  cache.pre.clear();
  for (const auto& layer : layers_) {
    Eigen::MatrixXd z = cache.activations.back() * layer.weights;
    z.rowwise() += layer.bias.transpose();
    cache.activations.push_back(apply(layer.activation, z));
    cache.pre.push_back(std::move(z));
  }
  cache.owner = id_;
  cache.version = version_;
  return cache.activations.back();
}

Gradients Mlp::backward(const Cache& cache, const Eigen::MatrixXd& output_grad) const {
  if (cache.owner != id_ || cache.version != version_ || cache.pre.size() != layers_.size()) {
    throw StaleCacheError("forward cache does not belong to the current network state");
  }
  const auto& out = cache.activations.back();
  if (output_grad.rows() != out.rows() || output_grad.cols() != out.cols()) {
    throw DimensionError("output gradient shape does not match the forward output");
  }
  const std::size_t depth = layers_.size();
  Gradients g;
  g.weights.resize(depth);
  g.bias.resize(depth);
  Eigen::MatrixXd delta =
      output_grad.cwiseProduct(derivative(layers_[depth - 1].activation, cache.pre[depth - 1], out));
  for (std::size_t l = depth; l-- > 0;) {
    g.weights[l] = cache.activations[l].transpose() * delta;
    g.bias[l] = delta.colwise().sum().transpose();
    Eigen::MatrixXd upstream = delta * layers_[l].weights.transpose();
    if (l == 0) {
      g.input = std::move(upstream);
    } else {
      delta = upstream.cwiseProduct(derivative(layers_[l - 1].activation, cache.pre[l - 1], cache.activations[l]));
    }
  }
  return g;
}

bool Mlp::all_finite() const {
  for (const auto& l : layers_) {
    if (!l.weights.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

bool operator==(const Mlp& a, const Mlp& b) {
  if (a.layers_.size() != b.layers_.size()) return false;
  for (std::size_t l = 0; l < a.layers_.size(); ++l) {
    const auto& x = a.layers_[l];
    const auto& y = b.layers_[l];
    if (x.activation != y.activation || x.weights.rows() != y.weights.rows() ||
        x.weights.cols() != y.weights.cols() || x.weights != y.weights || x.bias != y.bias) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------

Adam::Adam(const Mlp& net, Options options) : options_(options) {
  for (const auto& l : net.layers()) {
    m_w_.push_back(Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()));
    v_w_.push_back(Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()));
    m_b_.push_back(Eigen::VectorXd::Zero(l.bias.size()));
    v_b_.push_back(Eigen::VectorXd::Zero(l.bias.size()));
  }
}

void Adam::step(Mlp& net, const Gradients& grads) {
  const auto& layers = net.layers();
  if (grads.weights.size() != layers.size() || grads.bias.size() != layers.size() || m_w_.size() != layers.size()) {
    throw DimensionError("gradient and optimizer state do not match the network");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (grads.weights[l].rows() != layers[l].weights.rows() || grads.weights[l].cols() != layers[l].weights.cols() ||
        grads.bias[l].size() != layers[l].bias.size()) {
      throw DimensionError("gradient shape mismatch at layer " + std::to_string(l));
    }
    if (!grads.weights[l].allFinite() || !grads.bias[l].allFinite()) {
      throw NonFiniteGradientError("non-finite gradient at layer " + std::to_string(l) + " (step " +
                                   std::to_string(steps_ + 1) + "); update rejected");
    }
  }

  ++steps_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  const double lr = options_.learning_rate;
  const double eps = options_.epsilon;
  auto& mutable_layers = net.mutable_layers();
  for (std::size_t l = 0; l < mutable_layers.size(); ++l) {
    m_w_[l] = b1 * m_w_[l] + (1.0 - b1) * grads.weights[l];
    v_w_[l] = b2 * v_w_[l] + (1.0 - b2) * grads.weights[l].cwiseProduct(grads.weights[l]);
    m_b_[l] = b1 * m_b_[l] + (1.0 - b1) * grads.bias[l];
    v_b_[l] = b2 * v_b_[l] + (1.0 - b2) * grads.bias[l].cwiseProduct(grads.bias[l]);
    mutable_layers[l].weights.array() -=
        lr * (m_w_[l].array() / c1) / ((v_w_[l].array() / c2).sqrt() + eps);
    mutable_layers[l].bias.array() -= lr * (m_b_[l].array() / c1) / ((v_b_[l].array() / c2).sqrt() + eps);
  }
}

// ---------------------------------------------------------------------------

std::string base64_encode(std::span<const unsigned char> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<unsigned char> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw CorruptionError("base64 length is not a multiple of 4");
  std::vector<unsigned char> out(3 * text.size() / 4);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw CorruptionError("invalid base64 payload");
  std::size_t padding = 0;
  if (!text.empty() && text.back() == '=') ++padding;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++padding;
  out.resize(static_cast<std::size_t>(n) - padding);
  return out;
}

namespace {

std::string encode_doubles(const std::vector<double>& values) {
  std::vector<unsigned char> bytes(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<unsigned char>((bits >> (8 * b)) & 0xFF);
  }
  return base64_encode(bytes);
}

std::vector<double> decode_doubles(std::string_view text, std::size_t count) {
  const auto bytes = base64_decode(text);
  if (bytes.size() != count * 8) {
    throw CorruptionError("weight blob holds " + std::to_string(bytes.size()) + " bytes, expected " +
                          std::to_string(count * 8));
  }
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[i * 8 + b]) << (8 * b);
    values[i] = std::bit_cast<double>(bits);
  }
  return values;
}

}  // namespace

std::string to_checkpoint(const Mlp& net, std::uint64_t seed, std::uint64_t step) {
  nlohmann::ordered_json j;
  j["format"] = "bbgan-mlp";
  j["version"] = 1;
  j["seed"] = seed;
  j["step"] = step;
  auto layers = nlohmann::ordered_json::array();
  for (const auto& l : net.layers()) {
    nlohmann::ordered_json lj;
    lj["inputs"] = l.weights.rows();
    lj["outputs"] = l.weights.cols();
    lj["activation"] = to_string(l.activation);
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(l.weights.size()));
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) w.push_back(l.weights(r, c));
    }
    lj["weights"] = encode_doubles(w);
    lj["bias"] = encode_doubles(std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size()));
    layers.push_back(std::move(lj));
  }
  j["layers"] = std::move(layers);
  return j.dump();
}

Checkpoint from_checkpoint(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CorruptionError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "bbgan-mlp") throw CorruptionError("not an MLP checkpoint");
    if (j.at("version").get<int>() != 1) {
      throw MigrationError("checkpoint version " + j.at("version").dump() + " is not supported");
    }
    std::vector<DenseLayer> layers;
    for (const auto& lj : j.at("layers")) {
      const auto rows = lj.at("inputs").get<Eigen::Index>();
      const auto cols = lj.at("outputs").get<Eigen::Index>();
      const auto w = decode_doubles(lj.at("weights").get<std::string>(), static_cast<std::size_t>(rows * cols));
      const auto b = decode_doubles(lj.at("bias").get<std::string>(), static_cast<std::size_t>(cols));
      DenseLayer layer;
      layer.weights.resize(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) layer.weights(r, c) = w[static_cast<std::size_t>(r * cols + c)];
      }
      layer.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), cols);
      layer.activation = parse_activation(lj.at("activation").get<std::string>());
      layers.push_back(std::move(layer));
    }
    return {Mlp(std::move(layers)), j.at("seed").get<std::uint64_t>(), j.at("step").get<std::uint64_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw CorruptionError(std::string("malformed checkpoint: ") + e.what());
  }
}

}  // namespace bbgan
