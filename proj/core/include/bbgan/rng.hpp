#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace bbgan {

// Counter-based generator keyed by (seed, stream). Output i is a pure
// function of the key and i, so a sampler can be split per worker or per
// purpose without any shared state.
class SeededSampler {
 public:
  using result_type = std::uint64_t;

  explicit SeededSampler(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()();

  // Independent child stream; does not advance this sampler.
  SeededSampler split(std::uint64_t stream) const;

  // Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  // Standard normal via Box-Muller; consumes two draws, keeps no cache.
  double normal();
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }
  std::uint64_t position() const noexcept { return counter_; }

 private:
  SeededSampler(std::uint64_t seed, std::uint64_t stream, std::uint64_t key);

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;
std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept;
// Hash of the exact bit patterns of a vector of doubles.
std::uint64_t hash_values(std::span<const double> values) noexcept;
std::uint64_t hash_string(std::string_view text) noexcept;

// Stream ids used by the pipeline. Each sampling purpose gets its own
// stream so that changing one stage never shifts another stage's draws.
namespace streams {
inline constexpr std::uint64_t kOmega = 1;
inline constexpr std::uint64_t kGanTraining = 100;
inline constexpr std::uint64_t kBoostSampling = 200;
inline constexpr std::uint64_t kAttack = 300;
inline constexpr std::uint64_t kRandomAttack = 400;
inline constexpr std::uint64_t kBaselines = 500;
inline constexpr std::uint64_t kEpisodes = 600;
}  // namespace streams

}  // namespace bbgan
