#include "bbgan/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bbgan/error.hpp"
#include "bbgan/logging.hpp"

namespace bbgan {

std::vector<Vector> random_attack(std::size_t dims, std::size_t count, SeededSampler& rng) {
  return sample_uniform_normalized(dims, count, rng);
}

std::vector<Vector> gmm_attack(const InducedSet& induced, double fraction, std::size_t count, SeededSampler& rng) {
  const std::size_t k = gmm_components(fraction, induced.size());
  const GmmModel model = fit_gmm(induced.points(), k, rng);
  return gmm_sample(model, count, rng);
}

std::size_t candidate_pool_size(std::size_t count) { return std::max(count, 50 * count); }

namespace {

void split_scored(const SampleSet& omega, std::vector<Vector>& points, std::vector<double>& scores) {
  points.reserve(omega.size());
  scores.reserve(omega.size());
  for (const auto& s : omega.samples) {
    points.push_back(s.mu);
    scores.push_back(s.q);
  }
}

std::vector<Vector> pick(std::vector<Vector>& candidates, const std::vector<std::size_t>& order, std::size_t count) {
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(std::move(candidates[order[i]]));
  return out;
}

}  // namespace

std::vector<Vector> svm_rank_attack(const SampleSet& omega, std::size_t count, SeededSampler& rng) {
  return svm_rank_attack(omega, count, rng, SvmOptions{});
}

std::vector<Vector> svm_rank_attack(const SampleSet& omega, std::size_t count, SeededSampler& rng,
                                    const SvmOptions& options) {
  if (omega.samples.empty()) throw ConfigError("svm", "needs a scored sample set");
  std::vector<Vector> points;
  std::vector<double> scores;
  split_scored(omega, points, scores);
  const SvmRanker svm = SvmRanker::fit(points, scores, options, rng);

  auto candidates = sample_uniform_normalized(omega.space.dims(), candidate_pool_size(count), rng);
  std::vector<BinPrediction> predicted;
  predicted.reserve(candidates.size());
  for (const auto& c : candidates) predicted.push_back(svm.predict(c));
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (predicted[a].bin != predicted[b].bin) return predicted[a].bin < predicted[b].bin;
    return predicted[a].margin > predicted[b].margin;
  });
  return pick(candidates, order, count);
}

std::vector<Vector> gp_rank_attack(const SampleSet& omega, std::size_t count, SeededSampler& rng) {
  return gp_rank_attack(omega, count, rng, GpOptions{});
}

std::vector<Vector> gp_rank_attack(const SampleSet& omega, std::size_t count, SeededSampler& rng,
                                   const GpOptions& options, std::size_t max_train) {
  std::vector<Vector> points;
  std::vector<double> scores;
  split_scored(omega, points, scores);
  if (max_train >= 2 && points.size() > max_train) {
    std::vector<std::size_t> idx(points.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < max_train; ++i) std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
    idx.resize(max_train);
    std::sort(idx.begin(), idx.end());
    std::vector<Vector> p;
    std::vector<double> s;
    for (auto i : idx) {
      p.push_back(points[i]);
      s.push_back(scores[i]);
    }
    points = std::move(p);
    scores = std::move(s);
  }
  const GpModel gp = GpModel::fit(points, scores, options);

  auto candidates = sample_uniform_normalized(omega.space.dims(), candidate_pool_size(count), rng);
  const auto mean = gp.predict_mean(candidates);
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mean[a] < mean[b]; });
  return pick(candidates, order, count);
}

BayesResult bayesian_attack(const Environment& env, const BayesOptions& options, SeededSampler& rng) {
  if (options.steps < options.tail) {
    throw ConfigError("baselines.bayes_steps", "must be at least the tail size " + std::to_string(options.tail));
  }
  if (options.initial < 2) throw ConfigError("baselines.bayes_initial", "must be at least 2");
  if (options.window < 2) throw ConfigError("baselines.bayes_window", "must be at least 2");
  const ParameterSpace& space = env.space();
  const std::size_t d = space.dims();

  BayesResult result;
  result.history.reserve(options.steps);
  double incumbent = std::numeric_limits<double>::infinity();
  auto record = [&](Vector mu) {
    const double q = env.evaluate(space.denormalize(mu));
    incumbent = std::min(incumbent, q);
    result.history.push_back({std::move(mu), q, Origin::baseline()});
  };

  for (auto& mu : sample_uniform_normalized(d, std::min(options.initial, options.steps), rng)) record(std::move(mu));

  while (result.history.size() < options.steps) {
    const std::size_t begin = result.history.size() > options.window ? result.history.size() - options.window : 0;
    std::vector<Vector> xs;
    std::vector<double> ys;
    for (std::size_t i = begin; i < result.history.size(); ++i) {
      xs.push_back(result.history[i].mu);
      ys.push_back(result.history[i].q);
    }
    // The surrogate sees standardized targets; predictions are mapped back.
    double center = 0.0, spread = 0.0;
    for (double y : ys) center += y / static_cast<double>(ys.size());
    for (double y : ys) spread += (y - center) * (y - center) / static_cast<double>(ys.size());
    spread = spread > 0.0 ? std::sqrt(spread) : 1.0;
    for (double& y : ys) y = (y - center) / spread;
    const GpModel gp = GpModel::fit(xs, ys);
    auto candidates = sample_uniform_normalized(d, options.pool, rng);
    const auto predictions = gp.predict(candidates);
    std::size_t best = 0;
    double best_ei = -1.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const double mean = center + spread * predictions[i].mean;
      const double ei = expected_improvement(mean, spread * predictions[i].std, incumbent, options.xi);
      if (ei > best_ei) {
        best_ei = ei;
        best = i;
      }
    }
    record(std::move(candidates[best]));
  }

  std::vector<Vector> tail;
  for (std::size_t i = result.history.size() - options.tail; i < result.history.size(); ++i) {
    tail.push_back(result.history[i].mu);
  }
  bool chosen = false;
  for (std::size_t k : options.components) {
    if (k >= tail.size()) continue;
    SeededSampler fit_rng = rng.split(k);
    GmmModel model = fit_gmm(tail, k, fit_rng);
    std::vector<Vector> raw;
    for (const auto& mu : gmm_sample(model, options.attack_samples, fit_rng)) raw.push_back(space.denormalize(mu));
    const auto scores = evaluate_all(env, raw, options.workers);
    const auto f = std::count_if(scores.begin(), scores.end(), [&](double q) { return q <= env.epsilon(); });
    const double afr = static_cast<double>(f) / static_cast<double>(scores.size());
    if (!chosen || afr > result.afr) {
      result.model = std::move(model);
      result.components = k;
      result.afr = afr;
      chosen = true;
    }
  }
  if (!chosen) throw ConfigError("baselines.bayes_tail", "no GMM size is smaller than the tail");
  log_info("bayesian attack chose k=" + std::to_string(result.components));
  return result;
}

}  // namespace bbgan
