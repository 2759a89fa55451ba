#include "bbgan/rng.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace bbgan {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(a ^ (mix64(b) + 0x632BE59BD9B4E019ULL + (a << 6) + (a >> 2)));
}

std::uint64_t hash_values(std::span<const double> values) noexcept {
  std::uint64_t h = mix64(values.size());
  for (double v : values) {
    // +0.0 and -0.0 hash alike.
    if (v == 0.0) v = 0.0;
    h = hash_combine(h, std::bit_cast<std::uint64_t>(v));
  }
  return h;
}

std::uint64_t hash_string(std::string_view text) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return mix64(h);
}

SeededSampler::SeededSampler(std::uint64_t seed, std::uint64_t stream)
    : SeededSampler(seed, stream, hash_combine(mix64(seed), stream)) {}

SeededSampler::SeededSampler(std::uint64_t seed, std::uint64_t stream, std::uint64_t key)
    : seed_(seed), stream_(stream), key_(key) {}

SeededSampler::result_type SeededSampler::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

SeededSampler SeededSampler::split(std::uint64_t stream) const {
  return SeededSampler(seed_, stream, hash_combine(key_, stream ^ 0xA5A5A5A5A5A5A5A5ULL));
}

double SeededSampler::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double SeededSampler::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double SeededSampler::normal() {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t SeededSampler::below(std::uint64_t n) {
  if (n <= 1) return 0;
  // Rejection keeps the draw unbiased.
  const std::uint64_t limit = max() - max() % n;
  std::uint64_t x;
  do {
    x = (*this)();
  } while (x >= limit);
  return x % n;
}

}  // namespace bbgan
