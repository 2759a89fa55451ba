#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bbgan/rng.hpp"

namespace bbgan {

// A point in parameter space. Whether it is in raw units or in the
// normalized [-1,1]^d box is determined by where it is used: every learner
// works in normalized coordinates, environments consume raw ones.
using Vector = std::vector<double>;

// The box [lower, upper]^d of admissible semantic parameters.
class ParameterSpace {
 public:
  ParameterSpace(Vector lower, Vector upper, std::vector<std::string> names = {});

  // [-1,1]^d, where raw and normalized coordinates coincide.
  static ParameterSpace unit_box(std::size_t dims);

  std::size_t dims() const noexcept { return lower_.size(); }
  const Vector& lower() const noexcept { return lower_; }
  const Vector& upper() const noexcept { return upper_; }
  const std::vector<std::string>& names() const noexcept { return names_; }

  bool contains(std::span<const double> raw) const;
  // Throws RangeError naming the first offending dimension.
  void check(std::span<const double> raw) const;

  Vector normalize(std::span<const double> raw) const;
  // Inverse of normalize. Results are clamped into [lower, upper] so that
  // rounding never produces an out-of-box raw vector.
  Vector denormalize(std::span<const double> normalized) const;

  std::string to_json() const;
  static ParameterSpace from_json(std::string_view text);

  friend bool operator==(const ParameterSpace&, const ParameterSpace&) = default;

 private:
  Vector lower_;
  Vector upper_;
  std::vector<std::string> names_;
};

// n i.i.d. uniform raw points in the box.
std::vector<Vector> sample_uniform(const ParameterSpace& space, std::size_t n, SeededSampler& rng);

// n i.i.d. uniform points in [-1,1]^d.
std::vector<Vector> sample_uniform_normalized(std::size_t dims, std::size_t n, SeededSampler& rng);

}  // namespace bbgan
