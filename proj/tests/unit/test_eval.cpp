#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "bbgan/error.hpp"
#include "bbgan/eval.hpp"
#include "function_env.hpp"

using namespace bbgan;

namespace {

// q is the first coordinate mapped to [0,1].
testing_env::FunctionEnvironment linear_env(double epsilon) {
  return testing_env::FunctionEnvironment(2, epsilon, [](std::span<const double> mu) { return (mu[0] + 1) / 2; });
}

}  // namespace

TEST(AttackFoolingRate, DirectCount) {
  auto env = linear_env(0.3);
  std::vector<Vector> samples;
  for (int i = 0; i < 4; ++i) samples.push_back({-0.8, 0.1 * i});
  for (int i = 0; i < 6; ++i) samples.push_back({0.8, 0.1 * i});
  const auto r = attack_fooling_rate(env, samples, "x", 3);
  EXPECT_EQ(r.m, 10u);
  EXPECT_EQ(r.f, 4u);
  EXPECT_DOUBLE_EQ(r.afr, 0.4);
  EXPECT_EQ(r.records.size(), 10u);
  for (const auto& rec : r.records) EXPECT_EQ(rec.q <= 0.3, rec.mu[0] < 0);
}

TEST(AttackFoolingRate, PermutationInvariantAndParallelSafe) {
  auto env = linear_env(0.4);
  SeededSampler rng(1);
  auto samples = sample_uniform_normalized(2, 300, rng);
  const auto a = attack_fooling_rate(env, samples, "x", 0, 1);
  const auto b = attack_fooling_rate(env, samples, "x", 0, 4);
  EXPECT_EQ(a, b);
  std::reverse(samples.begin(), samples.end());
  const auto c = attack_fooling_rate(env, samples, "x", 0);
  EXPECT_EQ(a.f, c.f);
  EXPECT_DOUBLE_EQ(a.afr, c.afr);
}

TEST(AttackFoolingRate, FailuresExcludedFromBothCounts) {
  testing_env::FunctionEnvironment env(1, 0.3, [](std::span<const double> mu) {
    if (mu[0] > 0.5) throw EvaluationError("boom", {mu.begin(), mu.end()}, 0);
    return mu[0] < 0 ? 0.1 : 0.9;
  });
  const std::vector<Vector> samples{{-0.5}, {0.2}, {0.9}, {0.7}};
  const auto r = attack_fooling_rate(env, samples, "x", 0);
  EXPECT_EQ(r.requested, 4u);
  EXPECT_EQ(r.failed, 2u);
  EXPECT_EQ(r.m, 2u);
  EXPECT_EQ(r.f, 1u);
  EXPECT_DOUBLE_EQ(r.afr, 0.5);
  EXPECT_FALSE(r.records[2].ok);
  EXPECT_FALSE(r.records[2].error.empty());
}

TEST(AttackFoolingRate, EmptyRejected) {
  auto env = linear_env(0.3);
  EXPECT_THROW(attack_fooling_rate(env, std::vector<Vector>{}, "x", 0), ConfigError);
}

TEST(FormatPercent, OneDecimal) {
  EXPECT_EQ(format_percent(0.908), "90.8%");
  EXPECT_EQ(format_percent(1.0), "100.0%");
  EXPECT_EQ(format_percent(0.0), "0.0%");
}

TEST(Diversity, UniformSamplesMatchAnalyticStd) {
  SeededSampler rng(2);
  const auto samples = sample_uniform_normalized(3, 1000, rng);
  const auto d = diversity(samples);
  for (double s : d.per_dim) EXPECT_NEAR(s, 1.0 / std::sqrt(3.0), 0.03);
  EXPECT_NEAR(d.mu_std, 0.577, 0.03);
}

TEST(Diversity, ConstantSamplesTriggerCollapseAlarm) {
  auto env = linear_env(0.3);
  const std::vector<Vector> same(20, Vector{0.1, 0.2});
  EXPECT_EQ(diversity(same).mu_std, 0.0);
  const auto r = attack_fooling_rate(env, same, "x", 0);
  EXPECT_TRUE(r.collapse_alarm);
  SeededSampler rng(3);
  EXPECT_FALSE(attack_fooling_rate(env, sample_uniform_normalized(2, 50, rng), "y", 0).collapse_alarm);
}

TEST(Diversity, ConstantDimensionIsolated) {
  SeededSampler rng(4);
  std::vector<Vector> samples;
  for (int i = 0; i < 200; ++i) samples.push_back({rng.uniform(-1, 1), 0.3});
  const auto d = diversity(samples);
  EXPECT_EQ(d.per_dim[1], 0.0);
  EXPECT_GT(d.per_dim[0], 0.5);
  EXPECT_NEAR(d.mu_std, d.per_dim[0] / 2, 1e-15);
}

TEST(Diversity, NeedsTwoSamples) {
  const std::vector<Vector> one{{0.0}};
  EXPECT_THROW(diversity(one), ConfigError);
}

TEST(EvaluationReport, JsonRoundTrip) {
  auto env = linear_env(0.3);
  SeededSampler rng(5);
  const auto r = attack_fooling_rate(env, sample_uniform_normalized(2, 40, rng), "bbgan", 11);
  const auto back = EvaluationReport::from_json(r.to_json());
  EXPECT_EQ(back, r);
  EXPECT_EQ(back.to_json(), r.to_json());
}

TEST(EvaluationReport, CountedSamplesRecheckable) {
  auto env = linear_env(0.35);
  SeededSampler rng(6);
  const auto r = EvaluationReport::from_json(attack_fooling_rate(env, sample_uniform_normalized(2, 100, rng), "x", 0).to_json());
  const auto f = std::count_if(r.records.begin(), r.records.end(), [&](const SampleRecord& s) { return s.ok && s.q <= r.epsilon; });
  EXPECT_EQ(static_cast<std::size_t>(f), r.f);
}

TEST(EvaluationReport, RejectsBadVersionAndGarbage) {
  EXPECT_THROW(EvaluationReport::from_json("{\"version\": 9}"), MigrationError);
  EXPECT_THROW(EvaluationReport::from_json("not json"), CorruptionError);
}

TEST(ComparisonTable, TwoRows) {
  EvaluationReport a, b;
  a.method = "random";
  a.m = 100;
  a.f = 5;
  a.afr = 0.05;
  a.mu_std = 0.577;
  b.method = "bbgan";
  b.m = 100;
  b.f = 95;
  b.afr = 0.95;
  b.mu_std = 0.12;
  const std::vector<EvaluationReport> rows{a, b};
  const auto csv = comparison_csv(rows);
  EXPECT_EQ(csv.rfind("method,M,f,failed,afr,mu_std\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  const auto text = comparison_text(rows);
  EXPECT_NE(text.find("95.0%"), std::string::npos);
  EXPECT_NE(text.find("mu_std"), std::string::npos);
}

TEST(NearestNeighbor, Distances) {
  const std::vector<Vector> train{{0.0, 0.0, 0.0}};
  const std::vector<Vector> gen{{1.0, 0.0, 0.0}, {0.0, 0.0, 0.0}};
  const auto r = nearest_neighbor(gen, train);
  EXPECT_DOUBLE_EQ(r.distances[0], 1.0);
  EXPECT_EQ(r.distances[1], 0.0);
  EXPECT_DOUBLE_EQ(r.mean, 0.5);
  const std::vector<Vector> bad{{1.0}};
  EXPECT_THROW(nearest_neighbor(bad, train), DimensionError);
}

TEST(ModeCoverage, CountsDistinctBalls) {
  const BasinEnvironment env({{-0.5, -0.5}, {0.5, 0.5}}, 1.0, 0.2);
  EXPECT_DOUBLE_EQ(mode_coverage(env, std::vector<Vector>{{-0.5, -0.45}}), 0.5);
  EXPECT_DOUBLE_EQ(mode_coverage(env, std::vector<Vector>{{-0.5, -0.45}, {0.5, 0.5}}), 1.0);
  EXPECT_DOUBLE_EQ(mode_coverage(env, std::vector<Vector>{{0.0, 0.0}}), 0.0);
}

TEST(ConvergenceProbe, WholeBoxFoolingGivesFullCoverage) {
  const BasinEnvironment env({{-0.5, -0.5}, {0.5, 0.5}}, 0.5, 1.0);
  ProbeOptions o;
  o.schedule = {100, 400};
  o.s = 50;
  const auto rows = convergence_probe(env, o);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) EXPECT_DOUBLE_EQ(r.induced_coverage, 1.0);
}

TEST(ConvergenceProbe, EmptyFoolingSetSurfaces) {
  const BasinEnvironment env({{0.9, 0.9}}, 0.01, 1e-6);
  ProbeOptions o;
  o.schedule = {50};
  EXPECT_THROW(convergence_probe(env, o), EmptyInducedSetError);
}

TEST(ConvergenceProbe, CsvHasOneRowPerN) {
  std::vector<ProbeRow> rows{{250, 1, 10, 0.5, 0.0, 0.0}, {1000, 1, 40, 1.0, 0.0, 0.0}};
  const auto csv = probe_csv(rows);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST(Histogram, IsSvg) {
  const std::vector<double> g{0.1, 0.2, 0.25}, r{0.5, 0.9, 0.7, 0.3};
  const auto svg = svg_histogram(g, r, 0.3);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}
