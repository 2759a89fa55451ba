#include <gtest/gtest.h>

#include <cmath>

#include "bbgan/baselines.hpp"
#include "bbgan/error.hpp"
#include "bbgan/gp.hpp"
#include "function_env.hpp"
#include "oracles.hpp"

using namespace bbgan;

TEST(Kernel, UnitOnDiagonalAndDecays) {
  const Vector a{0.1, 0.2}, b{0.4, 0.6};
  EXPECT_EQ(exponential_kernel(a, a, 0.7), 1.0);
  EXPECT_NEAR(exponential_kernel(a, b, 0.7), std::exp(-0.5 / 0.7), 1e-15);
}

TEST(Gp, DefaultLengthScale) {
  const std::vector<Vector> xs{{0, 0, 0, 0}, {1, 1, 1, 1}};
  const double ys[] = {0.0, 1.0};
  EXPECT_DOUBLE_EQ(GpModel::fit(xs, ys).length_scale(), 1.0);
}

TEST(Gp, InterpolatesTrainingPoints) {
  SeededSampler rng(1);
  std::vector<Vector> xs;
  std::vector<double> ys;
  for (int i = 0; i < 40; ++i) {
    xs.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    ys.push_back(rng.uniform());
  }
  GpOptions o;
  o.jitter = 1e-10;
  const auto gp = GpModel::fit(xs, ys, o);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto p = gp.predict(xs[i]);
    EXPECT_NEAR(p.mean, ys[i], 1e-6);
    EXPECT_LT(p.std, 1e-3);
  }
}

TEST(Gp, FarQueryRevertsToPrior) {
  const std::vector<Vector> xs{{0.0}, {0.1}, {0.3}};
  const double ys[] = {0.2, 0.4, 0.9};
  const auto gp = GpModel::fit(xs, ys);
  const auto p = gp.predict(Vector{0.3 + 10.0 * gp.length_scale() + 10.0});
  EXPECT_NEAR(p.mean, gp.prior_mean(), 1e-3);
  EXPECT_NEAR(p.std, 1.0, 1e-3);
  EXPECT_NEAR(gp.prior_mean(), 0.5, 1e-12);
}

TEST(Gp, TwoPointClosedForm) {
  const std::vector<Vector> xs{{-0.4, 0.0}, {0.4, 0.0}};
  const double ys[] = {0.1, 0.7};
  GpOptions o;
  o.length_scale = 0.5;
  o.jitter = 1e-10;
  const auto gp = GpModel::fit(xs, ys, o);
  const double m = 0.4;
  const double c = std::exp(-0.8 / 0.5) + 0.0;
  const double k11 = 1.0 + gp.jitter();
  const double det = k11 * k11 - c * c;
  for (const Vector& q : {Vector{0.0, 0.0}, Vector{0.1, 0.3}, Vector{-0.2, -0.1}}) {
    const double k1 = std::exp(-std::hypot(q[0] + 0.4, q[1]) / 0.5);
    const double k2 = std::exp(-std::hypot(q[0] - 0.4, q[1]) / 0.5);
    const double r1 = ys[0] - m, r2 = ys[1] - m;
    const double a1 = (k11 * r1 - c * r2) / det;
    const double a2 = (-c * r1 + k11 * r2) / det;
    const double var = 1.0 - (k1 * (k11 * k1 - c * k2) + k2 * (-c * k1 + k11 * k2)) / det;
    const auto p = gp.predict(q);
    EXPECT_NEAR(p.mean, m + k1 * a1 + k2 * a2, 1e-9);
    EXPECT_NEAR(p.std, std::sqrt(std::max(0.0, var)), 1e-6);
  }
  EXPECT_NEAR(gp.predict(Vector{0.0, 0.0}).mean, 0.4, 1e-12);
}

TEST(Gp, VarianceNeverExceedsPrior) {
  SeededSampler rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vector> xs;
    std::vector<double> ys;
    const std::size_t n = 2 + rng.below(30);
    for (std::size_t i = 0; i < n; ++i) {
      xs.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
      ys.push_back(rng.uniform());
    }
    const auto gp = GpModel::fit(xs, ys);
    for (int q = 0; q < 50; ++q) {
      const auto p = gp.predict(Vector{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)});
      EXPECT_GE(p.std, 0.0);
      EXPECT_LE(p.std * p.std, 1.0 + 1e-9);
    }
  }
}

TEST(Gp, DuplicateInputsEscalateJitter) {
  const std::vector<Vector> xs{{0.2}, {0.2}, {0.2}};
  const double ys[] = {0.1, 0.5, 0.9};
  GpOptions o;
  o.jitter = 1e-300;
  const auto gp = GpModel::fit(xs, ys, o);
  EXPECT_GT(gp.jitter(), 1e-300);
  EXPECT_TRUE(std::isfinite(gp.predict(Vector{0.2}).mean));
}

TEST(Gp, NeedsTwoPoints) {
  const std::vector<Vector> xs{{0.2}};
  const double ys[] = {0.1};
  EXPECT_THROW(GpModel::fit(xs, ys), ConfigError);
}

TEST(Gp, MeanOnlyMatchesFullPrediction) {
  SeededSampler rng(3);
  std::vector<Vector> xs, qs;
  std::vector<double> ys;
  for (int i = 0; i < 20; ++i) {
    xs.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    ys.push_back(rng.uniform());
    qs.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
  }
  const auto gp = GpModel::fit(xs, ys);
  const auto means = gp.predict_mean(qs);
  const auto full = gp.predict(qs);
  for (std::size_t i = 0; i < qs.size(); ++i) EXPECT_NEAR(means[i], full[i].mean, 1e-12);
}

TEST(ExpectedImprovement, ZeroStd) {
  EXPECT_EQ(expected_improvement(0.4, 0.0, 0.4, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(expected_improvement(0.1, 0.0, 0.4, 0.0), 0.3);
  EXPECT_EQ(expected_improvement(0.5, 0.0, 0.4, 0.0), 0.0);
}

TEST(ExpectedImprovement, MatchesMonteCarlo) {
  EXPECT_NEAR(expected_improvement(0.0, 1.0, 1.0, 0.0), oracle::expected_improvement_mc(0.0, 1.0, 1.0, 0.0, 1'000'000, 1),
              0.005);
  EXPECT_NEAR(expected_improvement(0.0, 1.0, 0.0, 0.0), oracle::expected_improvement_mc(0.0, 1.0, 0.0, 0.0, 1'000'000, 2),
              0.003);
  EXPECT_NEAR(expected_improvement(0.0, 1.0, 1.0, 0.0), 1.0833, 1e-4);
  EXPECT_NEAR(expected_improvement(0.0, 1.0, 0.0, 0.0), 0.3989, 1e-4);
}

TEST(ExpectedImprovement, NonNegativeAndIncreasingInStd) {
  SeededSampler rng(4);
  for (int i = 0; i < 200; ++i) {
    const double mean = rng.uniform(), inc = rng.uniform(), xi = 0.01 * rng.uniform();
    double prev = -1.0;
    for (double s = 0.01; s < 2.0; s += 0.05) {
      const double ei = expected_improvement(mean, s, inc, xi);
      EXPECT_GE(ei, 0.0);
      if (inc > mean) {
        EXPECT_GE(ei, prev - 1e-15);
      }
      prev = ei;
    }
  }
}

TEST(BayesianAttack, RejectsTooFewSteps) {
  testing_env::FunctionEnvironment env(1, 0.3, [](std::span<const double> mu) { return mu[0] * mu[0]; });
  BayesOptions o;
  o.steps = 10;
  o.tail = 20;
  SeededSampler rng(1);
  EXPECT_THROW(bayesian_attack(env, o, rng), ConfigError);
}

TEST(BayesianAttack, ConcentratesAroundQuadraticMinimum) {
  testing_env::FunctionEnvironment env(1, 0.05, [](std::span<const double> mu) {
    return (mu[0] - 0.2) * (mu[0] - 0.2) / 1.44;
  });
  // Grid-search oracle for the minimizer.
  double best = 0, best_q = 1e9;
  for (int i = 0; i <= 2000; ++i) {
    const double x = -1.0 + i / 1000.0;
    const double q = (x - 0.2) * (x - 0.2) / 1.44;
    if (q < best_q) best_q = q, best = x;
  }
  BayesOptions o;
  o.steps = 300;
  o.tail = 100;
  o.window = 200;
  o.pool = 256;
  o.components = {1, 3};
  SeededSampler rng(2);
  const auto result = bayesian_attack(env, o, rng);
  ASSERT_EQ(result.history.size(), 300u);
  int near = 0;
  for (std::size_t i = 200; i < 300; ++i) near += std::abs(result.history[i].mu[0] - best) < 0.2;
  EXPECT_GE(near, 80);
  EXPECT_GT(result.afr, 0.0);
  EXPECT_TRUE(result.components == 1 || result.components == 3);
}
