#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bbgan/envs.hpp"

namespace bbgan {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct TrackSample {
  Vec2 position;
  double arc = 0.0;        // cumulative arc length from the start
  double curvature = 0.0;  // unsigned; +inf at a cusp
};

struct Gate {
  Vec2 position;
  double heading = 0.0;  // tangent direction, radians
  double arc = 0.0;
};

struct Track {
  std::vector<TrackSample> samples;
  std::vector<Gate> gates;
  double length = 0.0;
};

// Point and derivatives of the uniform quadratic B-spline whose control
// points are the anchors, at parameter t in [0, anchors - 2]. The curve runs
// from the midpoint of the first two anchors to that of the last two.
struct SplinePoint {
  Vec2 position;
  Vec2 first;
  Vec2 second;
};
SplinePoint eval_quadratic_bspline(std::span<const Vec2> anchors, double t);

// Dense samples of the track curve (at least 512) and `gate_count` gates at
// equal arc-length intervals, first gate at the start, last at the end.
// Throws GeometryError on coincident consecutive anchors.
Track build_track(std::span<const Vec2> anchors, std::size_t gate_count, std::size_t min_samples = 512);

// Race track defined by 3-5 perturbed anchor points. A gate fails when the
// curvature within half a gate spacing of it exceeds the curvature limit or
// when it sits closer than min_gate_gap to the previous gate. Q is the
// fraction of gates passed.
class SplineTrackEnvironment final : public Environment {
 public:
  struct Options {
    std::vector<Vec2> template_anchors;
    double perturbation = 1.0;
    std::size_t gate_count = 10;
    double curvature_limit = 1.0;
    double min_gate_gap = 1.0;
  };

  SplineTrackEnvironment(double epsilon, Options options);

  // Built-in templates with 3, 4 and 5 anchors.
  static std::vector<Vec2> default_template(std::size_t anchors);

  const Options& options() const noexcept { return options_; }

  static std::vector<Vec2> to_anchors(std::span<const double> raw);
  // Per-gate pass/fail on an arbitrary anchor sequence (no box check).
  std::vector<bool> gate_results(std::span<const Vec2> anchors) const;
  double score_anchors(std::span<const Vec2> anchors) const;

  EpisodeTrace rollout(std::span<const double> raw, std::size_t episode) const override;
  std::string descriptor() const override;

 protected:
  double episode_score(std::span<const double> raw, std::size_t episode) const override;

 private:
  static ParameterSpace make_space(const Options& options);
  EpisodeTrace trace_for(std::span<const Vec2> anchors) const;

  Options options_;
};

}  // namespace bbgan
