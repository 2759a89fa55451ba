#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bbgan/envs.hpp"
#include "bbgan/param_space.hpp"
#include "bbgan/rng.hpp"

namespace bbgan {

// Where a scored sample came from.
struct Origin {
  enum class Kind { Uniform, Generated, Baseline };
  Kind kind = Kind::Uniform;
  int stage = 0;  // meaningful for Generated only

  static Origin uniform() { return {Kind::Uniform, 0}; }
  static Origin generated(int stage) { return {Kind::Generated, stage}; }
  static Origin baseline() { return {Kind::Baseline, 0}; }

  std::string to_string() const;
  static Origin parse(std::string_view text);
  friend bool operator==(const Origin&, const Origin&) = default;
};

struct ScoredSample {
  Vector mu;  // normalized
  double q = 0.0;
  Origin origin;
  friend bool operator==(const ScoredSample&, const ScoredSample&) = default;
};

// The global sample set. Points are stored normalized; `space` maps them
// back to raw units.
struct SampleSet {
  ParameterSpace space;
  std::vector<ScoredSample> samples;

  std::size_t size() const noexcept { return samples.size(); }
  // Number of uniform-origin samples: the N of the initial set.
  std::size_t uniform_count() const noexcept;
};

// The lowest-scoring fooling samples, ascending by q with ties broken by
// lexicographic mu and then by position in the source set.
struct InducedSet {
  ParameterSpace space;
  std::vector<ScoredSample> samples;
  std::size_t requested = 0;
  double epsilon = 0.0;
  bool shortfall = false;

  std::size_t size() const noexcept { return samples.size(); }
  std::vector<Vector> points() const;
};

// Anything that can emit normalized parameter vectors.
class ParameterGenerator {
 public:
  virtual ~ParameterGenerator() = default;
  virtual std::vector<Vector> sample(std::size_t count, SeededSampler& rng) const = 0;
};

// Minimum number of qualifying samples for GAN training.
inline constexpr std::size_t kMinInducedForTraining = 20;

// Omega_0: n uniform samples scored through env. Exact duplicate draws are
// redrawn. Order follows sample index whatever the evaluation order.
SampleSet build_omega(const Environment& env, std::size_t n, SeededSampler& rng, unsigned workers = 1);

// Up to s lowest-q samples with q <= epsilon. Throws EmptyInducedSetError
// when none qualify and InsufficientInducedSetError when fewer than
// min_qualifying do; otherwise a short set is flagged and a warning logged.
InducedSet induce(const SampleSet& omega, std::size_t s, double epsilon, std::size_t min_qualifying = 1);

// Plain schedule: floor(beta * N) generator samples are scored and added.
// With replication > 1 the cheaper variant applies: floor(practical_fraction
// * N) samples are scored and each is added `replication` times, so that
// practical_fraction * replication plays the role of beta.
struct BoostSchedule {
  std::size_t stages = 1;  // K
  double rate = 0.5;       // beta
  double practical_fraction = 0.1;
  std::size_t replication = 1;

  bool practical() const noexcept { return replication > 1; }
  // Throws ConfigError when out of range or, for the practical variant,
  // when practical_fraction * replication is not within 10% of rate.
  void validate() const;
  std::size_t additions(std::size_t n) const;    // entries appended to Omega
  std::size_t evaluations(std::size_t n) const;  // fresh generator samples scored
};

// Omega_k = Omega_{k-1} plus generator samples tagged generated(stage).
// N is the uniform count of the previous set.
SampleSet boost_update(const SampleSet& previous, const ParameterGenerator& generator, const Environment& env,
                       const BoostSchedule& schedule, int stage, SeededSampler& rng, unsigned workers = 1);

// CSV: header "index,origin,q,mu_0,...,mu_{d-1}"; floats in shortest
// round-trip form.
std::string to_csv(std::span<const ScoredSample> samples, std::size_t dims);
std::vector<ScoredSample> samples_from_csv(std::string_view text, std::size_t dims);

std::string to_json(const SampleSet& set);
SampleSet sample_set_from_json(std::string_view text);
std::string to_json(const InducedSet& set);
InducedSet induced_set_from_json(std::string_view text);

// Shortest decimal that round-trips to exactly the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

}  // namespace bbgan
