#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bbgan/param_space.hpp"
#include "bbgan/rng.hpp"

namespace bbgan {

// One step of an agent/environment interaction: state id, a digest of the
// observation, the action taken, and the reward received.
struct EpisodeStep {
  std::uint64_t state = 0;
  std::uint64_t observation_digest = 0;
  double action = 0.0;
  double reward = 0.0;
};

struct EpisodeTrace {
  std::vector<EpisodeStep> steps;

  std::size_t horizon() const noexcept { return steps.size(); }
  // Episode score: the sum of per-step rewards.
  double score() const noexcept;
};

// A black-box scorer mapping raw parameters to an episode score in [0,1].
// The agent under attack lives inside the implementation. Implementations
// must be safe to call concurrently.
class Environment {
 public:
  virtual ~Environment() = default;

  const ParameterSpace& space() const noexcept { return space_; }
  double epsilon() const noexcept { return epsilon_; }
  std::size_t episodes_per_eval() const noexcept { return episodes_; }

  // Mean score over episodes_per_eval episodes. Validates the input against
  // the space and the output against [0,1].
  double evaluate(std::span<const double> raw) const;

  // Full trace of one episode. Its score() equals what that episode
  // contributes to evaluate().
  virtual EpisodeTrace rollout(std::span<const double> raw, std::size_t episode) const;

  virtual bool deterministic() const { return true; }
  virtual std::string descriptor() const = 0;

 protected:
  Environment(ParameterSpace space, double epsilon, std::size_t episodes);

  virtual double episode_score(std::span<const double> raw, std::size_t episode) const = 0;
  // Default: average of episode_score over the episodes. Overridden by
  // wrappers that delegate the whole evaluation.
  virtual double score(std::span<const double> raw) const;

  static double checked_score(double q, std::span<const double> raw, std::size_t episode);

 private:
  ParameterSpace space_;
  double epsilon_;
  std::size_t episodes_;
};

using EnvironmentPtr = std::shared_ptr<const Environment>;

// Result of a single evaluation inside a batch.
struct EvalOutcome {
  double q = 0.0;
  bool ok = false;
  std::string error;
};

// Evaluates every raw point on a bounded worker pool. Outcome i always
// belongs to input i. Never throws for per-point evaluation failures.
std::vector<EvalOutcome> evaluate_batch(const Environment& env, std::span<const Vector> raw,
                                        unsigned workers);

// As evaluate_batch, but throws EvaluationAborted on the first (lowest
// index) failure, reporting how many evaluations succeeded.
std::vector<double> evaluate_all(const Environment& env, std::span<const Vector> raw, unsigned workers);

// Q(mu) = min(1, min_i |mu - c_i| / radius) on [-1,1]^d. The fooling set
// {Q <= epsilon} is the union of balls of radius epsilon*radius around the
// centers. With noise > 0 each episode adds seeded Gaussian noise to Q and
// clamps to [0,1].
class BasinEnvironment final : public Environment {
 public:
  struct Options {
    std::size_t episodes = 1;
    double noise = 0.0;
    std::uint64_t seed = 0;
  };

  BasinEnvironment(std::vector<Vector> centers, double radius, double epsilon, Options options);
  BasinEnvironment(std::vector<Vector> centers, double radius, double epsilon)
      : BasinEnvironment(std::move(centers), radius, epsilon, Options{}) {}

  // Picks the radius so that the fooling set covers `fraction` of the box,
  // assuming disjoint balls.
  static BasinEnvironment with_fooling_fraction(std::vector<Vector> centers, double epsilon,
                                                double fraction, Options options);
  static BasinEnvironment with_fooling_fraction(std::vector<Vector> centers, double epsilon, double fraction) {
    return with_fooling_fraction(std::move(centers), epsilon, fraction, Options{});
  }

  const std::vector<Vector>& centers() const noexcept { return centers_; }
  double radius() const noexcept { return radius_; }
  double fooling_radius() const noexcept { return epsilon() * radius_; }

  // Noise-free score, the analytic Q.
  double analytic_score(std::span<const double> mu) const;
  bool in_fooling_set(std::span<const double> mu) const;
  // Index of the fooling ball containing mu (the nearest one when balls overlap).
  std::optional<std::size_t> mode_of(std::span<const double> mu) const;

  bool deterministic() const override { return noise_ == 0.0; }
  std::string descriptor() const override;

 protected:
  double episode_score(std::span<const double> raw, std::size_t episode) const override;

 private:
  std::vector<Vector> centers_;
  double radius_;
  double noise_;
  std::uint64_t seed_;
};

struct FoolingVolume {
  double fraction = 0.0;
  double std_error = 0.0;
  bool exact = false;
};

// Fraction of the box where Q <= epsilon. Exact when the fooling balls are
// disjoint and inside the box; otherwise a Monte-Carlo estimate.
FoolingVolume fooling_volume(const BasinEnvironment& env, std::size_t mc_samples = 1'000'000,
                             std::uint64_t seed = 0);

// Volume of the d-dimensional ball of radius r.
double ball_volume(std::size_t dims, double r);

// A fixed linear softmax classifier attacked by additive pixel noise mu on
// an 8x8 base image. Q = max(p_y - max_{j != y} p_j, 0) with p the softmax
// probabilities of the noisy image x + mu. The noise box keeps x + mu inside
// [0,1] without clipping.
class PixelClassifierEnvironment final : public Environment {
 public:
  struct Options {
    std::size_t side = 8;
    std::size_t classes = 3;
    double noise_bound = 0.1;
    // Logit gap of the clean image between its class and the others.
    double clean_logit_gap = 2.0;
    // Scale of the random classifier weights.
    double weight_scale = 1.0;
    std::uint64_t seed = 1;
  };

  PixelClassifierEnvironment(double epsilon, Options options);

  std::size_t pixels() const noexcept { return base_.size(); }
  std::size_t classes() const noexcept { return bias_.size(); }
  std::size_t label() const noexcept { return label_; }
  const Vector& base_image() const noexcept { return base_; }
  // Row-major classes x pixels.
  const Vector& weights() const noexcept { return weights_; }
  const Vector& bias() const noexcept { return bias_; }

  Vector probabilities(std::span<const double> noise) const;
  double margin(std::span<const double> noise) const;

  EpisodeTrace rollout(std::span<const double> raw, std::size_t episode) const override;
  std::string descriptor() const override;

 protected:
  double episode_score(std::span<const double> raw, std::size_t episode) const override;

 private:
  static ParameterSpace make_space(const Options& options, const Vector& base);
  static Vector make_base(std::size_t side);

  Options options_;
  Vector base_;
  Vector weights_;
  Vector bias_;
  std::size_t label_ = 0;
};

// Environment over the free dimensions of `base`, with the fixed dimensions
// spliced in before every evaluation.
class FrozenEnvironment final : public Environment {
 public:
  FrozenEnvironment(EnvironmentPtr base, std::map<std::size_t, double> fixed);

  const std::vector<std::size_t>& free_dims() const noexcept { return free_; }
  Vector splice(std::span<const double> free_values) const;

  bool deterministic() const override { return base_->deterministic(); }
  std::string descriptor() const override;
  EpisodeTrace rollout(std::span<const double> raw, std::size_t episode) const override;

 protected:
  double episode_score(std::span<const double> raw, std::size_t episode) const override;
  double score(std::span<const double> raw) const override;

 private:
  static ParameterSpace restricted_space(const Environment& base, const std::map<std::size_t, double>& fixed);

  EnvironmentPtr base_;
  std::map<std::size_t, double> fixed_;
  std::vector<std::size_t> free_;
};

std::shared_ptr<FrozenEnvironment> freeze(EnvironmentPtr base, const std::map<std::size_t, double>& fixed);

// Maps a continuous coordinate to one of `bins` equal sub-intervals of
// [lower, upper]; the upper bound lands in the last bin.
std::size_t categorical_bin(double value, double lower, double upper, std::size_t bins);

}  // namespace bbgan
