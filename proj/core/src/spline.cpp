#include "bbgan/spline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bbgan/error.hpp"

namespace bbgan {

namespace {

Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
double norm(Vec2 a) { return std::hypot(a.x, a.y); }
Vec2 midpoint(Vec2 a, Vec2 b) { return 0.5 * (a + b); }

}  // namespace

SplinePoint eval_quadratic_bspline(std::span<const Vec2> anchors, double t) {
  const std::size_t n = anchors.size();
  if (n < 3) throw GeometryError("a quadratic B-spline needs at least 3 anchors");
  const std::size_t segments = n - 2;
  t = std::clamp(t, 0.0, static_cast<double>(segments));
  const std::size_t j = std::min(static_cast<std::size_t>(t), segments - 1);
  const double u = t - static_cast<double>(j);

  // Bezier form of knot span j.
  const Vec2 b0 = midpoint(anchors[j], anchors[j + 1]);
  const Vec2 b1 = anchors[j + 1];
  const Vec2 b2 = midpoint(anchors[j + 1], anchors[j + 2]);

  SplinePoint p;
  const double w = 1.0 - u;
  p.position = (w * w) * b0 + (2.0 * w * u) * b1 + (u * u) * b2;
  p.first = (2.0 * w) * (b1 - b0) + (2.0 * u) * (b2 - b1);
  p.second = 2.0 * ((b2 - b1) - (b1 - b0));
  return p;
}

Track build_track(std::span<const Vec2> anchors, std::size_t gate_count, std::size_t min_samples) {
  if (anchors.size() < 3 || anchors.size() > 5) {
    throw GeometryError("a track needs 3 to 5 anchors, got " + std::to_string(anchors.size()));
  }
  if (gate_count < 2) throw GeometryError("a track needs at least 2 gates");
  double scale = 0.0;
  for (const auto& a : anchors) {
    if (!std::isfinite(a.x) || !std::isfinite(a.y)) throw GeometryError("anchor coordinates must be finite");
    scale = std::max({scale, std::abs(a.x), std::abs(a.y)});
  }
  for (std::size_t i = 1; i < anchors.size(); ++i) {
    if (norm(anchors[i] - anchors[i - 1]) <= 1e-9 * std::max(1.0, scale)) {
      throw GeometryError("anchors " + std::to_string(i - 1) + " and " + std::to_string(i) + " coincide");
    }
  }

  const std::size_t segments = anchors.size() - 2;
  const std::size_t count = std::max(min_samples, 256 * segments) + 1;
  Track track;
  track.samples.resize(count);
  std::vector<Vec2> tangents(count);
  const double t_max = static_cast<double>(segments);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = t_max * static_cast<double>(i) / static_cast<double>(count - 1);
    const SplinePoint p = eval_quadratic_bspline(anchors, t);
    const double speed = norm(p.first);
    auto& s = track.samples[i];
    s.position = p.position;
    if (speed < 1e-12) {
      s.curvature = std::numeric_limits<double>::infinity();
    } else {
      s.curvature = std::abs(p.first.x * p.second.y - p.first.y * p.second.x) / (speed * speed * speed);
    }
    tangents[i] = p.first;
    if (i > 0) s.arc = track.samples[i - 1].arc + norm(s.position - track.samples[i - 1].position);
  }
  track.length = track.samples.back().arc;
  if (!(track.length > 0.0)) throw GeometryError("track has zero length");

  track.gates.resize(gate_count);
  const double spacing = track.length / static_cast<double>(gate_count - 1);
  std::size_t k = 1;
  for (std::size_t g = 0; g < gate_count; ++g) {
    const double s = g + 1 == gate_count ? track.length : spacing * static_cast<double>(g);
    while (k < count - 1 && track.samples[k].arc < s) ++k;
    const auto& a = track.samples[k - 1];
    const auto& b = track.samples[k];
    const double span = b.arc - a.arc;
    const double w = span > 0.0 ? std::clamp((s - a.arc) / span, 0.0, 1.0) : 0.0;
    const Vec2 tangent = (1.0 - w) * tangents[k - 1] + w * tangents[k];
    auto& gate = track.gates[g];
    gate.position = (1.0 - w) * a.position + w * b.position;
    gate.heading = std::atan2(tangent.y, tangent.x);
    gate.arc = s;
  }
  return track;
}

// ---------------------------------------------------------------------------

std::vector<Vec2> SplineTrackEnvironment::default_template(std::size_t anchors) {
  switch (anchors) {
    case 3: return {{0.0, 0.0}, {10.0, 8.0}, {20.0, 0.0}};
    case 4: return {{0.0, 0.0}, {8.0, 8.0}, {16.0, 0.0}, {24.0, 8.0}};
    case 5: return {{0.0, 0.0}, {8.0, 7.0}, {16.0, 0.0}, {24.0, 7.0}, {32.0, 0.0}};
    default: throw GeometryError("track templates exist for 3 to 5 anchors");
  }
}

ParameterSpace SplineTrackEnvironment::make_space(const Options& options) {
  const auto& t = options.template_anchors;
  if (t.size() < 3 || t.size() > 5) throw GeometryError("a track needs 3 to 5 anchors");
  if (!(options.perturbation > 0.0)) throw RangeError("track perturbation must be positive");
  Vector lower, upper;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < t.size(); ++i) {
    lower.push_back(t[i].x - options.perturbation);
    upper.push_back(t[i].x + options.perturbation);
    lower.push_back(t[i].y - options.perturbation);
    upper.push_back(t[i].y + options.perturbation);
    names.push_back("anchor" + std::to_string(i) + ".x");
    names.push_back("anchor" + std::to_string(i) + ".y");
  }
  return ParameterSpace(std::move(lower), std::move(upper), std::move(names));
}

SplineTrackEnvironment::SplineTrackEnvironment(double epsilon, Options options)
    : Environment(make_space(options), epsilon, 1), options_(std::move(options)) {
  if (options_.gate_count < 2) throw RangeError("a track needs at least 2 gates");
  if (!(options_.curvature_limit > 0.0)) throw RangeError("curvature limit must be positive");
  if (!(options_.min_gate_gap > 0.0)) throw RangeError("minimum gate gap must be positive");
}

std::vector<Vec2> SplineTrackEnvironment::to_anchors(std::span<const double> raw) {
  if (raw.size() % 2 != 0) throw DimensionError("anchor coordinates come in (x, y) pairs");
  std::vector<Vec2> anchors(raw.size() / 2);
  for (std::size_t i = 0; i < anchors.size(); ++i) anchors[i] = {raw[2 * i], raw[2 * i + 1]};
  return anchors;
}

std::vector<bool> SplineTrackEnvironment::gate_results(std::span<const Vec2> anchors) const {
  const Track track = build_track(anchors, options_.gate_count);
  const double half_window = 0.5 * track.length / static_cast<double>(options_.gate_count - 1);
  std::vector<bool> passed(track.gates.size(), true);
  std::size_t lo = 0;
  for (std::size_t g = 0; g < track.gates.size(); ++g) {
    const Gate& gate = track.gates[g];
    while (lo < track.samples.size() && track.samples[lo].arc < gate.arc - half_window) ++lo;
    double peak = 0.0;
    for (std::size_t i = lo; i < track.samples.size() && track.samples[i].arc <= gate.arc + half_window; ++i) {
      peak = std::max(peak, track.samples[i].curvature);
    }
    if (peak > options_.curvature_limit) passed[g] = false;
    if (g > 0 && norm(gate.position - track.gates[g - 1].position) < options_.min_gate_gap) passed[g] = false;
  }
  return passed;
}

EpisodeTrace SplineTrackEnvironment::trace_for(std::span<const Vec2> anchors) const {
  const Track track = build_track(anchors, options_.gate_count);
  const auto passed = gate_results(anchors);
  const double reward = 1.0 / static_cast<double>(passed.size());
  EpisodeTrace trace;
  for (std::size_t g = 0; g < passed.size(); ++g) {
    const auto& gate = track.gates[g];
    const double pose[] = {gate.position.x, gate.position.y, gate.heading};
    trace.steps.push_back({g, hash_values(pose), 1.0, passed[g] ? reward : 0.0});
  }
  return trace;
}

double SplineTrackEnvironment::score_anchors(std::span<const Vec2> anchors) const {
  return std::clamp(trace_for(anchors).score(), 0.0, 1.0);
}

double SplineTrackEnvironment::episode_score(std::span<const double> raw, std::size_t) const {
  return score_anchors(to_anchors(raw));
}

EpisodeTrace SplineTrackEnvironment::rollout(std::span<const double> raw, std::size_t) const {
  space().check(raw);
  return trace_for(to_anchors(raw));
}

std::string SplineTrackEnvironment::descriptor() const {
  std::ostringstream os;
  os << "track(anchors=" << options_.template_anchors.size() << ",perturbation=" << options_.perturbation
     << ",gates=" << options_.gate_count << ",kappa_max=" << options_.curvature_limit
     << ",min_gap=" << options_.min_gate_gap << ",epsilon=" << epsilon() << ")";
  return os.str();
}

}  // namespace bbgan
