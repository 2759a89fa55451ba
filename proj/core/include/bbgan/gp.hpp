#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <vector>

#include "bbgan/param_space.hpp"

namespace bbgan {

// k(x, x') = exp(-|x - x'|_2 / length_scale); k(x, x) = 1.
double exponential_kernel(std::span<const double> a, std::span<const double> b, double length_scale);

struct GpOptions {
  // Non-positive selects sqrt(d)/2.
  double length_scale = 0.0;
  double jitter = 1e-8;
  double max_jitter = 1e-2;
};

struct GpPrediction {
  double mean = 0.0;
  double std = 0.0;
};

// Zero-noise GP regression with unit prior variance. The prior mean is the
// mean of the training targets.
class GpModel {
 public:
  static GpModel fit(const std::vector<Vector>& inputs, std::span<const double> targets, const GpOptions& options);
  static GpModel fit(const std::vector<Vector>& inputs, std::span<const double> targets);

  GpPrediction predict(std::span<const double> x) const;
  std::vector<GpPrediction> predict(const std::vector<Vector>& xs) const;
  // Posterior mean only; avoids the triangular solve per query.
  std::vector<double> predict_mean(const std::vector<Vector>& xs) const;

  double length_scale() const noexcept { return length_scale_; }
  double jitter() const noexcept { return jitter_; }
  double prior_mean() const noexcept { return prior_mean_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(inputs_.rows()); }

 private:
  Eigen::MatrixXd cross_kernel(const std::vector<Vector>& xs) const;

  Eigen::MatrixXd inputs_;
  Eigen::VectorXd alpha_;
  Eigen::MatrixXd chol_;  // lower factor of K + jitter I
  double length_scale_ = 1.0;
  double jitter_ = 0.0;
  double prior_mean_ = 0.0;
};

// Expected improvement below the incumbent (minimization):
// (I - m - xi) Phi(u) + s phi(u), u = (I - m - xi)/s.
double expected_improvement(double mean, double std, double incumbent, double xi);

}  // namespace bbgan
