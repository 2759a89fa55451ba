#include "bbgan/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bbgan/error.hpp"
#include "bbgan/logging.hpp"

namespace bbgan {

std::size_t score_bin(double q, std::size_t bins) {
  if (bins == 0) throw ConfigError("svm.bins", "must be at least 1");
  if (!std::isfinite(q)) throw NumericalError("cannot bin a non-finite score");
  const double clamped = std::clamp(q, 0.0, 1.0);
  return std::min(bins - 1, static_cast<std::size_t>(clamped * static_cast<double>(bins)));
}

SvmRanker SvmRanker::fit(const std::vector<Vector>& inputs, std::span<const double> scores, const SvmOptions& options,
                         SeededSampler& rng) {
  if (inputs.empty()) throw ConfigError("svm", "needs at least one training point");
  if (inputs.size() != scores.size()) throw DimensionError("SVM inputs and scores differ in length");
  const auto n = static_cast<Eigen::Index>(inputs.size());
  const auto d = static_cast<Eigen::Index>(inputs.front().size());

  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(inputs[static_cast<std::size_t>(i)].size()) != d) {
      throw DimensionError("SVM inputs have inconsistent dimensions");
    }
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = inputs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  SvmRanker svm;
  svm.offset_ = x.colwise().mean().transpose();
  svm.scale_ = ((x.rowwise() - svm.offset_.transpose()).colwise().squaredNorm() / static_cast<double>(n))
                   .cwiseSqrt()
                   .transpose();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!(svm.scale_(j) > 1e-12)) svm.scale_(j) = 1.0;
  }
  const Eigen::MatrixXd z = (x.rowwise() - svm.offset_.transpose()).array().rowwise() / svm.scale_.transpose().array();

  std::vector<std::size_t> labels(inputs.size());
  std::vector<std::size_t> counts(options.bins, 0);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    labels[i] = score_bin(scores[i], options.bins);
    ++counts[labels[i]];
  }

  svm.classifiers_.assign(options.bins, std::nullopt);
  const std::size_t iterations = std::max<std::size_t>(1, options.epochs * inputs.size());
  for (std::size_t c = 0; c < options.bins; ++c) {
    if (counts[c] == 0) {
      log_warning("SVM bin " + std::to_string(c) + " has no training samples; its classifier is omitted");
      continue;
    }
    Linear lin{Eigen::VectorXd::Zero(d), 0.0};
    for (std::size_t t = 1; t <= iterations; ++t) {
      const auto i = static_cast<Eigen::Index>(rng.below(inputs.size()));
      const double y = labels[static_cast<std::size_t>(i)] == c ? 1.0 : -1.0;
      const double eta = 1.0 / (options.lambda * static_cast<double>(t));
      const double decision = z.row(i).dot(lin.w) + lin.b;
      // The bias is the weight of a constant feature and is regularized too.
      lin.w *= 1.0 - eta * options.lambda;
      lin.b *= 1.0 - eta * options.lambda;
      if (y * decision < 1.0) {
        lin.w += eta * y * z.row(i).transpose();
        lin.b += eta * y;
      }
      const double norm = std::sqrt(lin.w.squaredNorm() + lin.b * lin.b);
      const double limit = 1.0 / std::sqrt(options.lambda);
      if (norm > limit) {
        lin.w *= limit / norm;
        lin.b *= limit / norm;
      }
    }
    svm.classifiers_[c] = std::move(lin);
  }
  return svm;
}

BinPrediction SvmRanker::predict(std::span<const double> x) const {
  if (static_cast<Eigen::Index>(x.size()) != offset_.size()) throw DimensionError("SVM query has the wrong dimension");
  Eigen::VectorXd z(offset_.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = (x[static_cast<std::size_t>(j)] - offset_(j)) / scale_(j);
  BinPrediction best{0, -std::numeric_limits<double>::infinity()};
  for (std::size_t c = 0; c < classifiers_.size(); ++c) {
    if (!classifiers_[c]) continue;
    const double v = z.dot(classifiers_[c]->w) + classifiers_[c]->b;
    if (v > best.margin) best = {c, v};
  }
  return best;
}

}  // namespace bbgan
