#include "bbgan/gp.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "bbgan/error.hpp"
#include "bbgan/logging.hpp"

namespace bbgan {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double exponential_kernel(std::span<const double> a, std::span<const double> b, double length_scale) {
  if (a.size() != b.size()) throw DimensionError("kernel arguments differ in dimension");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::exp(-std::sqrt(s) / length_scale);
}

GpModel GpModel::fit(const std::vector<Vector>& inputs, std::span<const double> targets) {
  return fit(inputs, targets, GpOptions{});
}

GpModel GpModel::fit(const std::vector<Vector>& inputs, std::span<const double> targets, const GpOptions& options) {
  if (inputs.size() < 2) throw ConfigError("gp", "needs at least 2 training points");
  if (inputs.size() != targets.size()) throw DimensionError("GP inputs and targets differ in length");
  const std::size_t d = inputs.front().size();
  const auto n = static_cast<Index>(inputs.size());

  GpModel gp;
  gp.length_scale_ = options.length_scale > 0.0 ? options.length_scale : std::sqrt(static_cast<double>(d)) / 2.0;
  gp.inputs_.resize(n, static_cast<Index>(d));
  for (Index i = 0; i < n; ++i) {
    const auto& row = inputs[static_cast<std::size_t>(i)];
    if (row.size() != d) throw DimensionError("GP inputs have inconsistent dimensions");
    for (std::size_t j = 0; j < d; ++j) gp.inputs_(i, static_cast<Index>(j)) = row[j];
  }
  VectorXd y(n);
  for (Index i = 0; i < n; ++i) y(i) = targets[static_cast<std::size_t>(i)];
  gp.prior_mean_ = y.mean();

  MatrixXd k(n, n);
  for (Index i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (Index j = 0; j < i; ++j) {
      const double v = std::exp(-(gp.inputs_.row(i) - gp.inputs_.row(j)).norm() / gp.length_scale_);
      k(i, j) = v;
      k(j, i) = v;
    }
  }

  for (double jitter = options.jitter; jitter <= options.max_jitter * (1.0 + 1e-12); jitter *= 10.0) {
    MatrixXd kj = k;
    kj.diagonal().array() += jitter;
    Eigen::LLT<MatrixXd> llt(kj);
    if (llt.info() == Eigen::Success && llt.matrixLLT().diagonal().minCoeff() > 0.0) {
      gp.jitter_ = jitter;
      gp.chol_ = llt.matrixL();
      gp.alpha_ = llt.solve(y - VectorXd::Constant(n, gp.prior_mean_));
      if (jitter > options.jitter) log_warning("GP jitter escalated to " + std::to_string(jitter));
      return gp;
    }
  }
  throw NumericalError("GP kernel matrix is not positive-definite even with jitter " +
                       std::to_string(options.max_jitter));
}

MatrixXd GpModel::cross_kernel(const std::vector<Vector>& xs) const {
  const auto d = inputs_.cols();
  MatrixXd q(d, static_cast<Index>(xs.size()));
  for (std::size_t c = 0; c < xs.size(); ++c) {
    if (static_cast<Index>(xs[c].size()) != d) throw DimensionError("GP query has the wrong dimension");
    for (Index j = 0; j < d; ++j) q(j, static_cast<Index>(c)) = xs[c][static_cast<std::size_t>(j)];
  }
  MatrixXd out(inputs_.rows(), q.cols());
  for (Index c = 0; c < q.cols(); ++c) {
    out.col(c) = (-(inputs_.rowwise() - q.col(c).transpose()).rowwise().norm() / length_scale_).array().exp().matrix();
  }
  return out;
}

std::vector<double> GpModel::predict_mean(const std::vector<Vector>& xs) const {
  const VectorXd mean = (cross_kernel(xs).transpose() * alpha_).array() + prior_mean_;
  return {mean.data(), mean.data() + mean.size()};
}

std::vector<GpPrediction> GpModel::predict(const std::vector<Vector>& xs) const {
  const MatrixXd ks = cross_kernel(xs);
  const VectorXd mean = (ks.transpose() * alpha_).array() + prior_mean_;
  const MatrixXd v = chol_.triangularView<Eigen::Lower>().solve(ks);
  const VectorXd reduction = v.colwise().squaredNorm().transpose();
  std::vector<GpPrediction> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto ii = static_cast<Index>(i);
    out[i] = {mean(ii), std::sqrt(std::max(0.0, 1.0 - reduction(ii)))};
  }
  return out;
}

GpPrediction GpModel::predict(std::span<const double> x) const {
  return predict(std::vector<Vector>{Vector(x.begin(), x.end())}).front();
}

double expected_improvement(double mean, double std, double incumbent, double xi) {
  const double gain = incumbent - mean - xi;
  if (!(std > 0.0)) return std::max(0.0, gain);
  const double u = gain / std;
  const double cdf = 0.5 * std::erfc(-u / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
  return std::max(0.0, gain * cdf + std * pdf);
}

}  // namespace bbgan
