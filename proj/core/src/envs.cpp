#include "bbgan/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bbgan/error.hpp"
#include "bbgan/parallel.hpp"

namespace bbgan {

double EpisodeTrace::score() const noexcept {
  double total = 0.0;
  for (const auto& s : steps) total += s.reward;
  return total;
}

Environment::Environment(ParameterSpace space, double epsilon, std::size_t episodes)
    : space_(std::move(space)), epsilon_(epsilon), episodes_(episodes) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw RangeError("fooling threshold must lie in (0, 1]");
  if (episodes == 0) throw RangeError("episodes_per_eval must be at least 1");
}

double Environment::checked_score(double q, std::span<const double> raw, std::size_t episode) {
  if (!std::isfinite(q)) {
    throw NonFiniteScoreError("episode " + std::to_string(episode) + " returned a non-finite score",
                              Vector(raw.begin(), raw.end()), episode);
  }
  if (q < 0.0 || q > 1.0) {
    throw ProtocolError("episode " + std::to_string(episode) + " returned score " + std::to_string(q) +
                            " outside [0, 1]",
                        Vector(raw.begin(), raw.end()), episode);
  }
  return q;
}

double Environment::score(std::span<const double> raw) const {
  double total = 0.0;
  for (std::size_t e = 0; e < episodes_; ++e) total += checked_score(episode_score(raw, e), raw, e);
  return total / static_cast<double>(episodes_);
}

double Environment::evaluate(std::span<const double> raw) const {
  space_.check(raw);
  const double q = score(raw);
  return checked_score(q, raw, 0);
}

EpisodeTrace Environment::rollout(std::span<const double> raw, std::size_t episode) const {
  space_.check(raw);
  EpisodeTrace trace;
  const double q = checked_score(episode_score(raw, episode), raw, episode);
  trace.steps.push_back({0, hash_values(raw), 0.0, q});
  return trace;
}

std::vector<EvalOutcome> evaluate_batch(const Environment& env, std::span<const Vector> raw,
                                        unsigned workers) {
  std::vector<EvalOutcome> out(raw.size());
  parallel_for(raw.size(), workers, [&](std::size_t i) {
    try {
      out[i].q = env.evaluate(raw[i]);
      out[i].ok = true;
    } catch (const std::exception& e) {
      out[i].ok = false;
      out[i].error = e.what();
    }
  });
  return out;
}

std::vector<double> evaluate_all(const Environment& env, std::span<const Vector> raw, unsigned workers) {
  auto outcomes = evaluate_batch(env, raw, workers);
  std::vector<double> q(outcomes.size());
  std::size_t completed = 0;
  std::size_t first_failure = outcomes.size();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].ok) {
      q[i] = outcomes[i].q;
      ++completed;
    } else if (first_failure == outcomes.size()) {
      first_failure = i;
    }
  }
  if (first_failure != outcomes.size()) {
    throw EvaluationAborted("evaluation of sample " + std::to_string(first_failure) + " failed: " +
                                outcomes[first_failure].error + " (" + std::to_string(completed) + " of " +
                                std::to_string(outcomes.size()) + " evaluations completed)",
                            completed, first_failure);
  }
  return q;
}

// ---------------------------------------------------------------------------

double ball_volume(std::size_t dims, double r) {
  const double d = static_cast<double>(dims);
  return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0) * std::pow(r, d);
}

namespace {

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

BasinEnvironment::BasinEnvironment(std::vector<Vector> centers, double radius, double epsilon,
                                   Options options)
    : Environment(ParameterSpace::unit_box(centers.empty() ? 1 : centers.front().size()), epsilon,
                  options.episodes),
      centers_(std::move(centers)),
      radius_(radius),
      noise_(options.noise),
      seed_(options.seed) {
  if (centers_.empty()) throw DimensionError("basin environment needs at least one mode");
  if (!(radius_ > 0.0) || !std::isfinite(radius_)) throw RangeError("basin radius must be positive");
  if (noise_ < 0.0) throw RangeError("basin noise must be non-negative");
  const std::size_t d = centers_.front().size();
  if (d == 0) throw DimensionError("basin environment needs at least one dimension");
  const double r = fooling_radius();
  for (auto& c : centers_) {
    if (c.size() != d) throw DimensionError("all basin centers must have the same dimension");
    for (double& v : c) {
      if (!(v >= -1.0 && v <= 1.0)) throw RangeError("basin center outside [-1, 1]");
      // Pull the center inward so its fooling ball fits in the box.
      if (r < 1.0) v = std::clamp(v, -1.0 + r, 1.0 - r);
    }
  }
}

BasinEnvironment BasinEnvironment::with_fooling_fraction(std::vector<Vector> centers, double epsilon,
                                                         double fraction, Options options) {
  if (centers.empty()) throw DimensionError("basin environment needs at least one mode");
  if (!(fraction > 0.0 && fraction < 1.0)) throw RangeError("fooling fraction must lie in (0, 1)");
  const std::size_t d = centers.front().size();
  const double k = static_cast<double>(centers.size());
  const double box = std::pow(2.0, static_cast<double>(d));
  const double r = std::pow(fraction * box / (k * ball_volume(d, 1.0)), 1.0 / static_cast<double>(d));
  return BasinEnvironment(std::move(centers), r / epsilon, epsilon, options);
}

double BasinEnvironment::analytic_score(std::span<const double> mu) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : centers_) best = std::min(best, distance(mu, c));
  return std::min(1.0, best / radius_);
}

bool BasinEnvironment::in_fooling_set(std::span<const double> mu) const {
  for (const auto& c : centers_) {
    if (distance(mu, c) <= fooling_radius()) return true;
  }
  return false;
}

std::optional<std::size_t> BasinEnvironment::mode_of(std::span<const double> mu) const {
  std::optional<std::size_t> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < centers_.size(); ++i) {
    const double d = distance(mu, centers_[i]);
    if (d <= fooling_radius() && d < best_d) {
      best = i;
      best_d = d;
    }
  }
  return best;
}

double BasinEnvironment::episode_score(std::span<const double> raw, std::size_t episode) const {
  const double q = analytic_score(raw);
  if (noise_ == 0.0) return q;
  SeededSampler rng = SeededSampler(seed_, streams::kEpisodes).split(hash_combine(hash_values(raw), episode));
  return std::clamp(q + noise_ * rng.normal(), 0.0, 1.0);
}

std::string BasinEnvironment::descriptor() const {
  std::ostringstream os;
  os << "basin(d=" << space().dims() << ",modes=" << centers_.size() << ",radius=" << radius_
     << ",epsilon=" << epsilon() << ",episodes=" << episodes_per_eval() << ",noise=" << noise_ << ")";
  return os.str();
}

FoolingVolume fooling_volume(const BasinEnvironment& env, std::size_t mc_samples, std::uint64_t seed) {
  const std::size_t d = env.space().dims();
  const double r = env.fooling_radius();
  const auto& centers = env.centers();
  bool disjoint = true;
  for (const auto& c : centers) {
    for (double v : c) {
      if (std::abs(v) + r > 1.0 + 1e-12) disjoint = false;
    }
  }
  for (std::size_t i = 0; i < centers.size() && disjoint; ++i) {
    for (std::size_t j = i + 1; j < centers.size(); ++j) {
      if (distance(centers[i], centers[j]) < 2.0 * r) {
        disjoint = false;
        break;
      }
    }
  }
  if (disjoint) {
    const double box = std::pow(2.0, static_cast<double>(d));
    return {static_cast<double>(centers.size()) * ball_volume(d, r) / box, 0.0, true};
  }
  SeededSampler rng(seed, 0xF00);
  std::size_t hits = 0;
  Vector p(d);
  for (std::size_t n = 0; n < mc_samples; ++n) {
    for (double& v : p) v = rng.uniform(-1.0, 1.0);
    if (env.in_fooling_set(p)) ++hits;
  }
  const double f = static_cast<double>(hits) / static_cast<double>(mc_samples);
  return {f, std::sqrt(f * (1.0 - f) / static_cast<double>(mc_samples)), false};
}

// ---------------------------------------------------------------------------

Vector PixelClassifierEnvironment::make_base(std::size_t side) {
  // A smooth blob on a mid-grey background, values in [0.2, 0.8].
  Vector base(side * side);
  const double c = (static_cast<double>(side) - 1.0) / 2.0;
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t col = 0; col < side; ++col) {
      const double dr = (static_cast<double>(r) - c) / (c + 1.0);
      const double dc = (static_cast<double>(col) - c) / (c + 1.0);
      base[r * side + col] = 0.2 + 0.6 * std::exp(-2.5 * (dr * dr + dc * dc));
    }
  }
  return base;
}

ParameterSpace PixelClassifierEnvironment::make_space(const Options& options, const Vector& base) {
  if (!(options.noise_bound > 0.0)) throw RangeError("pixel noise bound must be positive");
  Vector lower(base.size()), upper(base.size());
  std::vector<std::string> names(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    lower[i] = -std::min(options.noise_bound, base[i]);
    upper[i] = std::min(options.noise_bound, 1.0 - base[i]);
    names[i] = "px" + std::to_string(i);
  }
  return ParameterSpace(std::move(lower), std::move(upper), std::move(names));
}

PixelClassifierEnvironment::PixelClassifierEnvironment(double epsilon, Options options)
    : Environment(make_space(options, make_base(options.side)), epsilon, 1),
      options_(options),
      base_(make_base(options.side)) {
  if (options.classes < 2) throw RangeError("pixel classifier needs at least two classes");
  const std::size_t n = base_.size();
  const std::size_t k = options.classes;
  SeededSampler rng(options.seed, 0x91C);
  weights_.resize(k * n);
  for (double& w : weights_) w = options.weight_scale * rng.normal();
  // Bias chosen so the clean image has logits (gap, 0, ..., 0): class 0 wins.
  bias_.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += weights_[c * n + i] * base_[i];
    bias_[c] = (c == 0 ? options.clean_logit_gap : 0.0) - dot;
  }
  label_ = 0;
}

Vector PixelClassifierEnvironment::probabilities(std::span<const double> noise) const {
  const std::size_t n = base_.size();
  const std::size_t k = bias_.size();
  Vector logits(k);
  for (std::size_t c = 0; c < k; ++c) {
    double l = bias_[c];
    for (std::size_t i = 0; i < n; ++i) l += weights_[c * n + i] * (base_[i] + noise[i]);
    logits[c] = l;
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double& l : logits) {
    l = std::exp(l - top);
    z += l;
  }
  for (double& l : logits) l /= z;
  return logits;
}

double PixelClassifierEnvironment::margin(std::span<const double> noise) const {
  const Vector p = probabilities(noise);
  double other = 0.0;
  for (std::size_t c = 0; c < p.size(); ++c) {
    if (c != label_) other = std::max(other, p[c]);
  }
  return std::max(p[label_] - other, 0.0);
}

double PixelClassifierEnvironment::episode_score(std::span<const double> raw, std::size_t) const {
  return margin(raw);
}

EpisodeTrace PixelClassifierEnvironment::rollout(std::span<const double> raw, std::size_t episode) const {
  space().check(raw);
  Vector observed(base_.size());
  for (std::size_t i = 0; i < observed.size(); ++i) observed[i] = base_[i] + raw[i];
  const Vector p = probabilities(raw);
  const auto predicted = static_cast<double>(std::max_element(p.begin(), p.end()) - p.begin());
  EpisodeTrace trace;
  trace.steps.push_back({0, hash_values(observed), predicted, checked_score(margin(raw), raw, episode)});
  return trace;
}

std::string PixelClassifierEnvironment::descriptor() const {
  std::ostringstream os;
  os << "pixel(side=" << options_.side << ",classes=" << options_.classes << ",noise=" << options_.noise_bound
     << ",gap=" << options_.clean_logit_gap << ",scale=" << options_.weight_scale << ",seed=" << options_.seed
     << ",epsilon=" << epsilon() << ")";
  return os.str();
}

// ---------------------------------------------------------------------------

ParameterSpace FrozenEnvironment::restricted_space(const Environment& base,
                                                   const std::map<std::size_t, double>& fixed) {
  const auto& space = base.space();
  Vector lower, upper;
  std::vector<std::string> names;
  for (const auto& [dim, value] : fixed) {
    if (dim >= space.dims()) {
      throw RangeError("cannot freeze dimension " + std::to_string(dim) + " of a " +
                           std::to_string(space.dims()) + "-dimensional space",
                       static_cast<std::ptrdiff_t>(dim));
    }
    if (!(value >= space.lower()[dim] && value <= space.upper()[dim])) {
      throw RangeError("frozen value " + std::to_string(value) + " for dimension " + std::to_string(dim) +
                           " outside [" + std::to_string(space.lower()[dim]) + ", " +
                           std::to_string(space.upper()[dim]) + "]",
                       static_cast<std::ptrdiff_t>(dim));
    }
  }
  if (fixed.size() >= space.dims()) throw RangeError("freezing every dimension leaves nothing to attack");
  for (std::size_t i = 0; i < space.dims(); ++i) {
    if (fixed.count(i)) continue;
    lower.push_back(space.lower()[i]);
    upper.push_back(space.upper()[i]);
    if (!space.names().empty()) names.push_back(space.names()[i]);
  }
  return ParameterSpace(std::move(lower), std::move(upper), std::move(names));
}

FrozenEnvironment::FrozenEnvironment(EnvironmentPtr base, std::map<std::size_t, double> fixed)
    : Environment(restricted_space(*base, fixed), base->epsilon(), base->episodes_per_eval()),
      base_(std::move(base)),
      fixed_(std::move(fixed)) {
  for (std::size_t i = 0; i < base_->space().dims(); ++i) {
    if (!fixed_.count(i)) free_.push_back(i);
  }
}

Vector FrozenEnvironment::splice(std::span<const double> free_values) const {
  if (free_values.size() != free_.size()) {
    throw DimensionError("expected " + std::to_string(free_.size()) + " free parameters");
  }
  Vector full(base_->space().dims());
  for (const auto& [dim, value] : fixed_) full[dim] = value;
  for (std::size_t i = 0; i < free_.size(); ++i) full[free_[i]] = free_values[i];
  return full;
}

double FrozenEnvironment::score(std::span<const double> raw) const { return base_->evaluate(splice(raw)); }

double FrozenEnvironment::episode_score(std::span<const double> raw, std::size_t episode) const {
  return base_->rollout(splice(raw), episode).score();
}

EpisodeTrace FrozenEnvironment::rollout(std::span<const double> raw, std::size_t episode) const {
  space().check(raw);
  return base_->rollout(splice(raw), episode);
}

std::string FrozenEnvironment::descriptor() const {
  std::ostringstream os;
  os << "frozen(" << base_->descriptor() << ",fixed=" << fixed_.size() << ")";
  return os.str();
}

std::shared_ptr<FrozenEnvironment> freeze(EnvironmentPtr base, const std::map<std::size_t, double>& fixed) {
  return std::make_shared<FrozenEnvironment>(std::move(base), fixed);
}

std::size_t categorical_bin(double value, double lower, double upper, std::size_t bins) {
  if (bins == 0) throw RangeError("categorical parameter needs at least one bin");
  if (!(lower < upper)) throw RangeError("categorical range is empty");
  if (!(value >= lower && value <= upper)) throw RangeError("categorical value outside its range");
  const double t = (value - lower) / (upper - lower);
  return std::min(bins - 1, static_cast<std::size_t>(t * static_cast<double>(bins)));
}

}  // namespace bbgan
