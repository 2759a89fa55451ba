#include <gtest/gtest.h>

#include <cmath>

#include "bbgan/envs.hpp"
#include "bbgan/error.hpp"
#include "bbgan/eval.hpp"
#include "bbgan/gan.hpp"

using namespace bbgan;

namespace {

std::vector<Vector> cluster(const Vector& p, double jitter, std::size_t n, std::uint64_t seed) {
  SeededSampler rng(seed);
  std::vector<Vector> out;
  for (std::size_t i = 0; i < n; ++i) {
    Vector v = p;
    for (auto& x : v) x += jitter * rng.uniform(-1, 1);
    out.push_back(v);
  }
  return out;
}

double distance(const Vector& a, const Vector& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

TEST(Gan, LearnsTightCluster) {
  const Vector p{0.4, -0.3, 0.6};
  const auto data = cluster(p, 0.01, 100, 1);
  GanConfig cfg;
  cfg.seed = 3;
  const auto result = train_gan(data, cfg);
  SeededSampler rng(4);
  const auto samples = result.adversary.sample(1000, rng);
  Vector centroid(3, 0.0);
  for (const auto& d : data) {
    for (std::size_t j = 0; j < 3; ++j) centroid[j] += d[j] / 100.0;
  }
  const auto near = std::count_if(samples.begin(), samples.end(), [&](const Vector& s) { return distance(s, centroid) < 0.1; });
  EXPECT_GE(near, 950);
}

TEST(Gan, DiscriminatorNearHalfLateInTraining) {
  const auto data = cluster({0.2, 0.2}, 0.2, 100, 5);
  GanConfig cfg;
  cfg.seed = 6;
  const auto result = train_gan(data, cfg);
  double real = 0, fake = 0;
  const std::size_t tail = 200;
  for (std::size_t i = result.log.epochs.size() - tail; i < result.log.epochs.size(); ++i) {
    real += result.log.epochs[i].d_real / tail;
    fake += result.log.epochs[i].d_fake / tail;
  }
  EXPECT_NEAR(real, 0.5, 0.1);
  EXPECT_NEAR(fake, 0.5, 0.1);
  for (const auto& e : result.log.epochs) {
    EXPECT_TRUE(std::isfinite(e.d_loss));
    EXPECT_TRUE(std::isfinite(e.g_loss));
  }
}

TEST(Gan, SameSeedSameWeights) {
  const auto data = cluster({0.0, 0.5}, 0.1, 40, 7);
  GanConfig cfg;
  cfg.epochs = 50;
  cfg.seed = 8;
  const auto a = train_gan(data, cfg);
  const auto b = train_gan(data, cfg);
  EXPECT_TRUE(a.adversary.generator() == b.adversary.generator());
  EXPECT_TRUE(a.discriminator.net() == b.discriminator.net());
  cfg.seed = 9;
  const auto c = train_gan(data, cfg);
  EXPECT_FALSE(a.adversary.generator() == c.adversary.generator());
}

TEST(Gan, ShortInducedSetKeepsNominalEpochLength) {
  InducedSet induced{ParameterSpace({-1.0, -1.0}, {1.0, 1.0}), {}, 100, 0.3, true};
  for (const auto& p : cluster({0.1, -0.1}, 0.1, 45, 2)) induced.samples.push_back({p, 0.0, Origin::uniform()});
  GanConfig cfg;
  cfg.epochs = 7;
  EXPECT_EQ(train_gan(induced, cfg).steps, 35u);
  EXPECT_EQ(train_gan(induced.points(), cfg).steps, 21u);
}

TEST(Gan, ZeroDecayReturnsLastIterate) {
  const auto data = cluster({0.3, 0.3}, 0.1, 40, 11);
  GanConfig cfg;
  cfg.epochs = 30;
  cfg.seed = 12;
  cfg.ema_decay = 0.0;
  const auto last = train_gan(data, cfg);
  cfg.ema_decay = 0.9;
  const auto averaged = train_gan(data, cfg);
  // The discriminator and its training stream do not depend on the average.
  EXPECT_TRUE(last.discriminator.net() == averaged.discriminator.net());
  EXPECT_FALSE(last.adversary.generator() == averaged.adversary.generator());
}

TEST(Gan, RejectsSetSmallerThanBatch) {
  const auto data = cluster({0.0}, 0.1, 10, 1);
  EXPECT_THROW(train_gan(data, GanConfig{}), TrainingError);
}

TEST(Adversary, ZeroWeightsEmitZeroVector) {
  SeededSampler rng(1);
  const std::size_t hidden[] = {64, 64};
  Mlp g = Mlp::create(8, hidden, 3, Activation::LeakyRelu, Activation::Tanh, rng);
  for (auto& layer : g.mutable_layers()) {
    layer.weights.setZero();
    layer.bias.setZero();
  }
  Adversary adv(g, 8);
  for (const auto& s : adv.sample(50, rng)) {
    for (double v : s) EXPECT_EQ(v, 0.0);
  }
}

TEST(Adversary, SamplesInsideUnitBox) {
  SeededSampler rng(2);
  const std::size_t hidden[] = {8};
  Mlp g = Mlp::create(8, hidden, 4, Activation::LeakyRelu, Activation::Tanh, rng);
  for (auto& layer : g.mutable_layers()) layer.weights *= 50.0;
  Adversary adv(g, 8);
  for (const auto& s : adv.sample(250, rng)) {
    for (double v : s) {
      EXPECT_GE(v, -1.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Adversary, CheckpointRoundTrip) {
  SeededSampler rng(3);
  const std::size_t hidden[] = {8};
  Adversary adv(Mlp::create(8, hidden, 2, Activation::LeakyRelu, Activation::Tanh, rng), 8);
  const Adversary back = adversary_from_checkpoint(to_checkpoint(adv.generator(), 1, 2), 8);
  SeededSampler r1(5), r2(5);
  EXPECT_EQ(adv.sample(20, r1), back.sample(20, r2));
}

TEST(GanTrainLog, CsvRoundTrip) {
  GanTrainLog log;
  log.epochs = {{0, 1.25, 0.5, 0.6, 0.4}, {1, 1.0, 0.75, 0.55, 0.45}};
  const auto back = GanTrainLog::from_csv(log.to_csv());
  ASSERT_EQ(back.epochs.size(), 2u);
  EXPECT_EQ(back.epochs[1].g_loss, 0.75);
}

TEST(Boosting, EmptyBoostMatchesRetrainOnSameOmega) {
  const auto env = BasinEnvironment::with_fooling_fraction({{-0.5, -0.5}, {0.5, 0.5}}, 0.3, 0.1);
  BoostedOptions o;
  o.n = 600;
  o.s = 60;
  o.schedule = {1, 0.0, 1.0, 1};
  o.gan.epochs = 300;
  o.seed = 2;
  const auto run = train_boosted(env, o);
  ASSERT_EQ(run.stages.size(), 2u);
  EXPECT_EQ(run.omegas[1].samples, run.omegas[0].samples);
  EXPECT_EQ(run.induced[1].samples, run.induced[0].samples);
  // Both stages learn the same induced set; their attack rates agree closely.
  SeededSampler r0(1), r1(1);
  const double afr0 = attack_fooling_rate(env, run.stages[0].adversary.sample(200, r0), "g0", 0).afr;
  const double afr1 = attack_fooling_rate(env, run.stages[1].adversary.sample(200, r1), "g1", 0).afr;
  EXPECT_NEAR(afr0, afr1, 0.15);
}

TEST(Boosting, PracticalScheduleEvaluatesTenPercent) {
  const auto env = BasinEnvironment::with_fooling_fraction({{-0.5, -0.5}, {0.5, 0.5}}, 0.3, 0.1);
  BoostedOptions o;
  o.n = 1000;
  o.s = 100;
  o.schedule = {1, 0.5, 0.1, 5};
  o.gan.epochs = 100;
  o.seed = 3;
  const auto run = train_boosted(env, o);
  ASSERT_EQ(run.boost_evaluations.size(), 1u);
  EXPECT_EQ(run.boost_evaluations[0], 100u);
  EXPECT_EQ(run.omegas[1].size(), 1500u);
}
