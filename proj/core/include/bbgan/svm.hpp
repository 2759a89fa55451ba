#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "bbgan/param_space.hpp"
#include "bbgan/rng.hpp"

namespace bbgan {

// Equal-width bin of q in [0,1]; q = 1 lands in the last bin.
std::size_t score_bin(double q, std::size_t bins);

struct SvmOptions {
  std::size_t bins = 5;
  double lambda = 1e-3;
  std::size_t epochs = 30;
};

struct BinPrediction {
  std::size_t bin = 0;
  double margin = 0.0;  // decision value of the winning classifier
};

// One-vs-rest linear SVMs over score bins, trained with the Pegasos
// sub-gradient method on standardized features.
class SvmRanker {
 public:
  static SvmRanker fit(const std::vector<Vector>& inputs, std::span<const double> scores, const SvmOptions& options,
                       SeededSampler& rng);

  BinPrediction predict(std::span<const double> x) const;
  std::size_t bins() const noexcept { return classifiers_.size(); }
  bool has_classifier(std::size_t bin) const { return classifiers_.at(bin).has_value(); }

 private:
  struct Linear {
    Eigen::VectorXd w;
    double b = 0.0;
  };
  Eigen::VectorXd offset_;
  Eigen::VectorXd scale_;
  std::vector<std::optional<Linear>> classifiers_;
};

}  // namespace bbgan
