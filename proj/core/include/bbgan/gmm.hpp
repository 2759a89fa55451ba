#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <vector>

#include "bbgan/param_space.hpp"
#include "bbgan/rng.hpp"

namespace bbgan {

struct GmmComponent {
  double weight = 0.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

struct GmmModel {
  std::vector<GmmComponent> components;
  std::size_t dims = 0;
  // Total data log-likelihood before each M-step, one entry per iteration.
  std::vector<double> log_likelihood_trace;
  std::size_t iterations = 0;
  bool converged = false;

  std::size_t size() const noexcept { return components.size(); }
  double log_density(std::span<const double> x) const;
};

struct GmmOptions {
  double tolerance = 1e-7;  // on the mean per-point log-likelihood gain
  std::size_t max_iterations = 500;
  // Lower bound on every covariance eigenvalue.
  double regularization = 1e-6;
};

// Full-covariance EM with k-means++ seeding. Requires |data| > k.
GmmModel fit_gmm(const std::vector<Vector>& data, std::size_t k, SeededSampler& rng, const GmmOptions& options);
GmmModel fit_gmm(const std::vector<Vector>& data, std::size_t k, SeededSampler& rng);

// Component by weight, then a Gaussian draw, clipped to [-1,1]^d.
std::vector<Vector> gmm_sample(const GmmModel& model, std::size_t count, SeededSampler& rng);

// Number of components for a GMM sized as a fraction of the training set.
std::size_t gmm_components(double fraction, std::size_t samples);

}  // namespace bbgan
