#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "bbgan/envs.hpp"
#include "bbgan/error.hpp"

using namespace bbgan;

namespace {

double dist(const Vector& a, const Vector& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

TEST(BasinEnvironment, ZeroAtCenter) {
  BasinEnvironment env({{0.2, -0.1}}, 0.5, 0.3);
  EXPECT_EQ(env.evaluate(env.centers()[0]), 0.0);
}

TEST(BasinEnvironment, HalfRadiusGivesHalf) {
  BasinEnvironment env({{0.0, 0.0}}, 0.8, 0.3);
  const Vector mu{0.4, 0.0};
  EXPECT_NEAR(env.evaluate(mu), 0.5, 1e-15);
}

TEST(BasinEnvironment, SaturatesAtOne) {
  BasinEnvironment env({{0.0}}, 0.1, 0.3);
  const Vector mu{0.9};
  EXPECT_EQ(env.evaluate(mu), 1.0);
}

TEST(BasinEnvironment, FoolingSetMatchesAnalyticBalls) {
  BasinEnvironment env({{-0.5, -0.5, -0.5}, {0.5, 0.5, 0.5}}, 1.0, 0.3);
  SeededSampler rng(4);
  for (const auto& mu : sample_uniform(env.space(), 1000, rng)) {
    const double nearest = std::min(dist(mu, env.centers()[0]), dist(mu, env.centers()[1]));
    EXPECT_EQ(env.evaluate(mu) <= env.epsilon(), nearest <= env.fooling_radius());
    EXPECT_EQ(env.in_fooling_set(mu), nearest <= env.fooling_radius());
  }
}

TEST(BasinEnvironment, DeterministicIsBitIdentical) {
  BasinEnvironment env({{0.1, 0.2}}, 0.5, 0.3);
  SeededSampler rng(5);
  for (const auto& mu : sample_uniform(env.space(), 100, rng)) EXPECT_EQ(env.evaluate(mu), env.evaluate(mu));
}

TEST(BasinEnvironment, NoisyEpisodesAreSeededByInputNotOrder) {
  BasinEnvironment env({{0.0, 0.0}}, 1.0, 0.3, {5, 0.05, 9});
  EXPECT_FALSE(env.deterministic());
  SeededSampler rng(6);
  const auto points = sample_uniform(env.space(), 64, rng);
  const auto serial = evaluate_all(env, points, 1);
  const auto parallel = evaluate_all(env, points, 4);
  EXPECT_EQ(serial, parallel);
  for (double q : serial) {
    EXPECT_GE(q, 0.0);
    EXPECT_LE(q, 1.0);
  }
}

TEST(BasinEnvironment, RejectsOutOfBox) {
  BasinEnvironment env({{0.0}}, 1.0, 0.3);
  const Vector mu{1.5};
  EXPECT_THROW(env.evaluate(mu), RangeError);
}

TEST(BasinEnvironment, CentersClampedSoBallsFit) {
  BasinEnvironment env({{0.95, 0.0}}, 1.0, 0.3);
  EXPECT_LE(env.centers()[0][0] + env.fooling_radius(), 1.0 + 1e-12);
}

TEST(FoolingVolume, OneDimensionalInterval) {
  BasinEnvironment env({{0.0}}, 1.0, 0.3);
  EXPECT_NEAR(fooling_volume(env).fraction, 0.3, 1e-12);
}

TEST(FoolingVolume, DiskMatchesFormulaAndMonteCarlo) {
  BasinEnvironment env({{0.0, 0.0}}, 1.0, 0.3);
  const auto v = fooling_volume(env);
  EXPECT_TRUE(v.exact);
  EXPECT_NEAR(v.fraction, std::numbers::pi * 0.09 / 4.0, 1e-12);
  // Independent Monte-Carlo check.
  SeededSampler rng(7);
  std::size_t inside = 0;
  const std::size_t n = 1'000'000;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.uniform(-1, 1), y = rng.uniform(-1, 1);
    inside += x * x + y * y <= 0.09;
  }
  EXPECT_NEAR(static_cast<double>(inside) / n, v.fraction, 0.001);
}

TEST(FoolingVolume, TwoDisjointModesDouble) {
  BasinEnvironment one({{0.0, 0.0}}, 1.0, 0.3);
  BasinEnvironment two({{-0.5, 0.0}, {0.5, 0.0}}, 1.0, 0.3);
  EXPECT_NEAR(fooling_volume(two).fraction, 2.0 * fooling_volume(one).fraction, 1e-12);
}

TEST(FoolingVolume, WithFoolingFractionHitsTarget) {
  auto env = BasinEnvironment::with_fooling_fraction({{-0.5, -0.5, -0.5}, {0.5, 0.5, 0.5}}, 0.3, 0.05);
  EXPECT_NEAR(fooling_volume(env).fraction, 0.05, 1e-9);
}

TEST(EpisodeTrace, ScoreIsSumOfRewards) {
  EpisodeTrace t;
  t.steps = {{0, 0, 0, 0.25}, {1, 0, 0, 0.5}};
  EXPECT_DOUBLE_EQ(t.score(), 0.75);
  EXPECT_EQ(t.horizon(), 2u);
}

TEST(EpisodeTrace, DefaultRolloutMatchesEvaluate) {
  BasinEnvironment env({{0.0, 0.0}}, 1.0, 0.3);
  const Vector mu{0.3, 0.1};
  EXPECT_DOUBLE_EQ(env.rollout(mu, 0).score(), env.evaluate(mu));
}

TEST(EvaluateBatch, FailuresStayAtTheirIndex) {
  BasinEnvironment env({{0.0}}, 1.0, 0.3);
  const std::vector<Vector> points{{0.1}, {2.0}, {0.2}};
  const auto out = evaluate_batch(env, points, 2);
  EXPECT_TRUE(out[0].ok);
  EXPECT_FALSE(out[1].ok);
  EXPECT_FALSE(out[1].error.empty());
  EXPECT_TRUE(out[2].ok);
  try {
    evaluate_all(env, points, 1);
    FAIL();
  } catch (const EvaluationAborted& e) {
    EXPECT_EQ(e.failed_index(), 1u);
    EXPECT_EQ(e.completed(), 2u);
  }
}

namespace {

// Softmax margin computed from scratch from the exposed weights.
double margin_oracle(const PixelClassifierEnvironment& env, const Vector& noise) {
  const std::size_t n = env.pixels(), k = env.classes();
  std::vector<double> logits(k);
  for (std::size_t c = 0; c < k; ++c) {
    double l = env.bias()[c];
    for (std::size_t i = 0; i < n; ++i) l += env.weights()[c * n + i] * (env.base_image()[i] + noise[i]);
    logits[c] = l;
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double z = 0;
  for (double l : logits) z += std::exp(l - top);
  const double py = std::exp(logits[env.label()] - top) / z;
  double other = 0;
  for (std::size_t c = 0; c < k; ++c) {
    if (c != env.label()) other = std::max(other, std::exp(logits[c] - top) / z);
  }
  return std::max(py - other, 0.0);
}

}  // namespace

TEST(PixelClassifier, ZeroNoiseIsCleanMargin) {
  PixelClassifierEnvironment env(0.3, {});
  const Vector zero(env.pixels(), 0.0);
  const double e2 = std::exp(2.0);
  EXPECT_NEAR(env.evaluate(zero), (e2 - 1.0) / (e2 + 2.0), 1e-12);
  EXPECT_NEAR(env.evaluate(zero), margin_oracle(env, zero), 1e-12);
}

TEST(PixelClassifier, FoolingSetMatchesOracle) {
  PixelClassifierEnvironment env(0.3, {});
  SeededSampler rng(8);
  for (const auto& mu : sample_uniform(env.space(), 1000, rng)) {
    const double q = env.evaluate(mu);
    EXPECT_GE(q, 0.0);
    EXPECT_NEAR(q, margin_oracle(env, mu), 1e-12);
    EXPECT_EQ(q <= env.epsilon(), margin_oracle(env, mu) <= env.epsilon());
  }
}

TEST(PixelClassifier, NoiseBoxKeepsImageAdmissible) {
  PixelClassifierEnvironment env(0.3, {});
  for (std::size_t i = 0; i < env.pixels(); ++i) {
    EXPECT_GE(env.base_image()[i] + env.space().lower()[i], 0.0);
    EXPECT_LE(env.base_image()[i] + env.space().upper()[i], 1.0);
  }
}

TEST(PixelClassifier, RolloutReportsPredictedClass) {
  PixelClassifierEnvironment env(0.3, {});
  const Vector zero(env.pixels(), 0.0);
  const auto trace = env.rollout(zero, 0);
  ASSERT_EQ(trace.horizon(), 1u);
  EXPECT_EQ(trace.steps[0].action, 0.0);
  EXPECT_DOUBLE_EQ(trace.score(), env.evaluate(zero));
}

TEST(Freeze, EightToFour) {
  auto base = std::make_shared<BasinEnvironment>(std::vector<Vector>{Vector(8, 0.0)}, 2.0, 0.3);
  auto frozen = freeze(base, {{0, 0.1}, {2, 0.2}, {4, -0.3}, {6, 0.0}});
  EXPECT_EQ(frozen->space().dims(), 4u);
  const Vector free{0.5, 0.5, 0.5, 0.5};
  const Vector full{0.1, 0.5, 0.2, 0.5, -0.3, 0.5, 0.0, 0.5};
  EXPECT_EQ(frozen->evaluate(free), base->evaluate(full));
}

TEST(Freeze, NoneIsIdentity) {
  auto base = std::make_shared<BasinEnvironment>(std::vector<Vector>{{0.2, 0.1, 0.0}}, 1.0, 0.3);
  auto frozen = freeze(base, {});
  SeededSampler rng(9);
  for (const auto& mu : sample_uniform(base->space(), 100, rng)) EXPECT_EQ(frozen->evaluate(mu), base->evaluate(mu));
}

TEST(Freeze, OutOfRangeValueRejected) {
  auto base = std::make_shared<BasinEnvironment>(std::vector<Vector>{{0.0, 0.0}}, 1.0, 0.3);
  EXPECT_THROW(freeze(base, {{0, 3.0}}), RangeError);
  EXPECT_THROW(freeze(base, {{5, 0.0}}), RangeError);
  EXPECT_THROW(freeze(base, {{0, 0.0}, {1, 0.0}}), RangeError);
}

TEST(CategoricalBin, EqualSubintervals) {
  EXPECT_EQ(categorical_bin(0.0, 0.0, 1.0, 4), 0u);
  EXPECT_EQ(categorical_bin(0.26, 0.0, 1.0, 4), 1u);
  EXPECT_EQ(categorical_bin(1.0, 0.0, 1.0, 4), 3u);
}
