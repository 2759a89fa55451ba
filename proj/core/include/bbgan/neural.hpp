#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bbgan/rng.hpp"

namespace bbgan {

enum class Activation { Identity, Tanh, LeakyRelu, Sigmoid };

inline constexpr double kLeakySlope = 0.2;

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

// Fully connected layer: y = act(x W + b), x is a row of the batch.
struct DenseLayer {
  Eigen::MatrixXd weights;  // inputs x outputs
  Eigen::VectorXd bias;     // outputs
  Activation activation = Activation::Identity;
};

// Gradients of a scalar loss with respect to every weight, every bias and
// the network input.
struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> bias;
  Eigen::MatrixXd input;
};

// Multilayer perceptron with explicit weights. Batches are row-major in the
// sense that each row is one example.
class Mlp {
 public:
  // Everything backward needs from a forward pass. Tied to the network
  // state it was produced from.
  struct Cache {
    std::vector<Eigen::MatrixXd> activations;  // input, then each layer's output
    std::vector<Eigen::MatrixXd> pre;          // each layer's pre-activation
    std::uint64_t owner = 0;
    std::uint64_t version = 0;
  };

  Mlp() = default;
  explicit Mlp(std::vector<DenseLayer> layers);
  Mlp(const Mlp& other);
  Mlp& operator=(const Mlp& other);
  Mlp(Mlp&&) noexcept = default;
  Mlp& operator=(Mlp&&) noexcept = default;

  // Weights and biases uniform in +-1/sqrt(fan_in).
  static Mlp create(std::size_t input, std::span<const std::size_t> hidden, std::size_t output,
                    Activation hidden_activation, Activation output_activation, SeededSampler& rng);

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t parameter_count() const;
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  // Mutable access invalidates every outstanding cache.
  std::vector<DenseLayer>& mutable_layers();

  Eigen::MatrixXd forward(const Eigen::MatrixXd& batch) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& batch, Cache& cache) const;
  // output_grad is dLoss/dOutput, same shape as the forward output.
  Gradients backward(const Cache& cache, const Eigen::MatrixXd& output_grad) const;

  bool all_finite() const;
  friend bool operator==(const Mlp& a, const Mlp& b);

 private:
  void check_input(const Eigen::MatrixXd& batch) const;

  std::vector<DenseLayer> layers_;
  std::uint64_t id_ = next_id();
  std::uint64_t version_ = 0;

  static std::uint64_t next_id();
};

// Bias-corrected adaptive-moment optimizer.
class Adam {
 public:
  struct Options {
    double learning_rate = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double epsilon = 1e-8;
  };

  Adam(const Mlp& net, Options options);

  // Rejects non-finite gradients with NonFiniteGradientError, leaving the
  // network and the optimizer state untouched.
  void step(Mlp& net, const Gradients& grads);

  std::size_t steps() const noexcept { return steps_; }
  const Options& options() const noexcept { return options_; }

 private:
  Options options_;
  std::vector<Eigen::MatrixXd> m_w_, v_w_;
  std::vector<Eigen::VectorXd> m_b_, v_b_;
  std::size_t steps_ = 0;
};

// JSON envelope with architecture, seed, step count and base64-encoded
// little-endian float64 weight blobs (weights row-major, inputs x outputs).
std::string to_checkpoint(const Mlp& net, std::uint64_t seed, std::uint64_t step);

struct Checkpoint {
  Mlp net;
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
};
Checkpoint from_checkpoint(std::string_view text);

std::string base64_encode(std::span<const unsigned char> bytes);
std::vector<unsigned char> base64_decode(std::string_view text);

}  // namespace bbgan
