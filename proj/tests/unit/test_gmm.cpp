#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "bbgan/error.hpp"
#include "bbgan/gmm.hpp"

using namespace bbgan;

namespace {

std::vector<Vector> gaussian_blob(const Vector& mean, double sd, std::size_t n, SeededSampler& rng) {
  std::vector<Vector> out;
  for (std::size_t i = 0; i < n; ++i) {
    Vector v = mean;
    for (auto& x : v) x += sd * rng.normal();
    out.push_back(v);
  }
  return out;
}

}  // namespace

TEST(Gmm, SingleComponentIsClosedFormMle) {
  SeededSampler rng(1);
  std::vector<Vector> data;
  for (int i = 0; i < 300; ++i) {
    const double a = rng.normal(), b = rng.normal();
    data.push_back({0.3 + a, -0.2 + 0.5 * a + 0.3 * b, 0.1 * b + 0.2 * rng.normal()});
  }
  const auto model = fit_gmm(data, 1, rng);
  // Closed form, computed directly.
  Eigen::MatrixXd x(300, 3);
  for (int i = 0; i < 300; ++i) {
    for (int j = 0; j < 3; ++j) x(i, j) = data[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  const Eigen::VectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean.transpose();
  const Eigen::MatrixXd cov = centered.transpose() * centered / 300.0;
  ASSERT_EQ(model.size(), 1u);
  EXPECT_NEAR(model.components[0].weight, 1.0, 1e-12);
  EXPECT_LT((model.components[0].mean - mean).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((model.components[0].covariance - cov).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Gmm, RecoversTwoSeparatedClusters) {
  SeededSampler rng(2);
  auto data = gaussian_blob({-5.0, 0.0}, 1.0, 500, rng);
  auto right = gaussian_blob({5.0, 0.0}, 1.0, 500, rng);
  data.insert(data.end(), right.begin(), right.end());
  const auto model = fit_gmm(data, 2, rng);
  ASSERT_EQ(model.size(), 2u);
  std::vector<double> xs{model.components[0].mean(0), model.components[1].mean(0)};
  std::sort(xs.begin(), xs.end());
  EXPECT_NEAR(xs[0], -5.0, 0.2);
  EXPECT_NEAR(xs[1], 5.0, 0.2);
  for (const auto& c : model.components) {
    EXPECT_NEAR(c.mean(1), 0.0, 0.2);
    EXPECT_NEAR(c.weight, 0.5, 0.05);
  }
}

TEST(Gmm, LogLikelihoodNeverDecreases) {
  SeededSampler rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 1 + rng.below(3);
    const std::size_t k = 1 + rng.below(5);
    std::vector<Vector> data;
    for (std::size_t c = 0; c < 3; ++c) {
      Vector m(d);
      for (auto& v : m) v = rng.uniform(-1, 1);
      auto blob = gaussian_blob(m, 0.05 + rng.uniform() * 0.3, 40, rng);
      data.insert(data.end(), blob.begin(), blob.end());
    }
    const auto model = fit_gmm(data, k, rng);
    for (std::size_t i = 1; i < model.log_likelihood_trace.size(); ++i) {
      const double prev = model.log_likelihood_trace[i - 1];
      EXPECT_GE(model.log_likelihood_trace[i], prev - 1e-9 * std::abs(prev));
    }
  }
}

TEST(Gmm, WeightsSumToOneAndCovariancesPositiveDefinite) {
  SeededSampler rng(4);
  const auto data = gaussian_blob({0.0, 0.0, 0.0}, 0.3, 100, rng);
  const auto model = fit_gmm(data, 10, rng);
  double total = 0;
  for (const auto& c : model.components) {
    total += c.weight;
    EXPECT_GT(c.weight, 0.0);
    EXPECT_LT((c.covariance - c.covariance.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c.covariance);
    EXPECT_GE(eig.eigenvalues().minCoeff(), 1e-6 * (1 - 1e-9));
  }
  EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(Gmm, DuplicatePointsStayRegularized) {
  std::vector<Vector> data(30, Vector{0.2, 0.2});
  SeededSampler rng(5);
  const auto model = fit_gmm(data, 2, rng);
  for (const auto& c : model.components) EXPECT_GE(c.covariance.diagonal().minCoeff(), 1e-6 * (1 - 1e-9));
}

TEST(Gmm, NeedsMorePointsThanComponents) {
  std::vector<Vector> data(5, Vector{0.0});
  SeededSampler rng(6);
  EXPECT_THROW(fit_gmm(data, 5, rng), ConfigError);
}

TEST(GmmSample, RegularizationOnlyStaysAtMean) {
  std::vector<Vector> data(20, Vector{0.3, -0.4});
  SeededSampler rng(7);
  const auto model = fit_gmm(data, 1, rng);
  for (const auto& s : gmm_sample(model, 200, rng)) {
    EXPECT_NEAR(s[0], 0.3, 0.01);
    EXPECT_NEAR(s[1], -0.4, 0.01);
  }
}

TEST(GmmSample, ZeroWeightComponentNeverDrawn) {
  GmmModel model;
  model.dims = 1;
  model.components.push_back({1.0, Eigen::VectorXd::Constant(1, -0.5), Eigen::MatrixXd::Constant(1, 1, 1e-6)});
  model.components.push_back({0.0, Eigen::VectorXd::Constant(1, 0.5), Eigen::MatrixXd::Constant(1, 1, 1e-6)});
  SeededSampler rng(8);
  for (const auto& s : gmm_sample(model, 500, rng)) EXPECT_LT(s[0], 0.0);
}

TEST(GmmSample, SeededAndClipped) {
  SeededSampler rng(9);
  const auto data = gaussian_blob({0.9, -0.9}, 0.5, 100, rng);
  const auto model = fit_gmm(data, 3, rng);
  SeededSampler a(10), b(10);
  const auto s1 = gmm_sample(model, 300, a);
  EXPECT_EQ(s1, gmm_sample(model, 300, b));
  for (const auto& s : s1) {
    for (double v : s) {
      EXPECT_GE(v, -1.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(GmmComponents, PercentOfInducedSet) {
  EXPECT_EQ(gmm_components(0.1, 100), 10u);
  EXPECT_EQ(gmm_components(0.5, 100), 50u);
  EXPECT_EQ(gmm_components(0.0, 100), 1u);
}
