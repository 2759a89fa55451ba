#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "bbgan/envs.hpp"
#include "bbgan/error.hpp"
#include "bbgan/inducer.hpp"
#include "bbgan/neural.hpp"

namespace bbgan {

struct GanConfig {
  std::size_t latent_dim = 8;
  std::size_t hidden_units = 64;
  std::size_t hidden_layers = 2;
  std::size_t epochs = 2000;
  std::size_t batch_size = 20;
  Adam::Options optimizer{};
  // Decay of the running average of generator weights that is returned as
  // the adversary. 0 returns the last iterate.
  double ema_decay = 0.999;
  std::uint64_t seed = 0;
};

// Config for boosting stage `stage` of a run: same hyperparameters, a seed
// derived from (run seed, stage).
GanConfig stage_config(const GanConfig& base, std::uint64_t run_seed, int stage);

struct EpochStats {
  std::size_t epoch = 0;
  double d_loss = 0.0;
  double g_loss = 0.0;
  double d_real = 0.0;  // mean D(mu) over real minibatches
  double d_fake = 0.0;  // mean D(G(z))
};

struct GanTrainLog {
  std::vector<EpochStats> epochs;

  std::string to_csv() const;
  static GanTrainLog from_csv(std::string_view text);
};

// Generator G: z ~ N(0, I_m) -> tanh output in [-1,1]^d (normalized mu).
class Adversary final : public ParameterGenerator {
 public:
  Adversary(Mlp generator, std::size_t latent_dim);

  std::vector<Vector> sample(std::size_t count, SeededSampler& rng) const override;
  Eigen::MatrixXd latent(std::size_t count, SeededSampler& rng) const;

  const Mlp& generator() const noexcept { return generator_; }
  std::size_t latent_dim() const noexcept { return latent_dim_; }
  std::size_t output_dim() const { return generator_.output_dim(); }

 private:
  Mlp generator_;
  std::size_t latent_dim_;
};

// D(mu) = sigmoid(net(mu)); the network itself emits the logit so that the
// log-losses can be computed without cancellation.
class Discriminator {
 public:
  explicit Discriminator(Mlp net);

  Eigen::VectorXd probabilities(const Eigen::MatrixXd& batch) const;
  const Mlp& net() const noexcept { return net_; }

 private:
  Mlp net_;
};

struct GanResult {
  Adversary adversary;
  Discriminator discriminator;
  GanTrainLog log;
  std::size_t steps = 0;
};

// Raised when a loss goes non-finite. Holds the generator checkpoint from the
// last epoch that finished cleanly.
class TrainingDiverged : public TrainingError {
 public:
  TrainingDiverged(const std::string& what, std::string last_checkpoint)
      : TrainingError(what), last_checkpoint_(std::move(last_checkpoint)) {}
  const std::string& last_checkpoint() const noexcept { return last_checkpoint_; }

 private:
  std::string last_checkpoint_;
};

// Vanilla GAN on the induced set: D maximizes log D(mu) + log(1 - D(G(z))),
// G minimizes -log D(G(z)). One D step per G step.
GanResult train_gan(const InducedSet& induced, const GanConfig& config);
GanResult train_gan(const std::vector<Vector>& real, const GanConfig& config);

Adversary adversary_from_checkpoint(std::string_view text, std::size_t latent_dim);

// Stage 0 trains on induce(Omega_0); stage k applies boost_update with
// G_{k-1}, re-induces from the whole union and trains a fresh adversary.
struct BoostedRun {
  std::vector<SampleSet> omegas;
  std::vector<InducedSet> induced;
  std::vector<GanResult> stages;
  std::vector<std::size_t> boost_evaluations;  // fresh env queries per boost stage
};

struct BoostedOptions {
  std::size_t n = 1000;
  std::size_t s = 100;
  BoostSchedule schedule{};
  GanConfig gan{};
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

BoostedRun train_boosted(const Environment& env, const BoostedOptions& options);

}  // namespace bbgan
