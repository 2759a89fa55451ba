#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "bbgan/baselines.hpp"
#include "bbgan/envs.hpp"
#include "bbgan/gan.hpp"
#include "bbgan/inducer.hpp"

namespace bbgan {

struct BasinConfig {
  std::size_t dims = 3;
  std::size_t modes = 2;
  // Explicit centers override `modes`.
  std::vector<Vector> centers;
  double fooling_fraction = 0.05;
  double noise = 0.0;
  std::size_t episodes = 1;
  std::uint64_t seed = 1;
};

struct TrackConfig {
  std::size_t anchors = 4;
  double perturbation = 3.0;
  std::size_t gates = 10;
  double curvature_limit = 0.5;
  double min_gate_gap = 1.8;
};

struct PixelConfig {
  std::size_t side = 8;
  std::size_t classes = 3;
  double noise_bound = 0.1;
  double clean_logit_gap = 1.8;
  double weight_scale = 1.0;
  std::uint64_t seed = 1;
};

struct AdapterConfig {
  std::string endpoint;
  Vector lower;
  Vector upper;
  std::vector<std::string> names;
  double timeout_seconds = 30.0;
  std::size_t episodes = 1;
  std::size_t pool_size = 1;
  std::map<std::size_t, std::size_t> categorical;
};

struct EnvironmentConfig {
  std::string type = "basin";  // basin | track | pixel | adapter
  BasinConfig basin;
  TrackConfig track;
  PixelConfig pixel;
  AdapterConfig adapter;
  // Dimension -> raw value held fixed.
  std::map<std::size_t, double> freeze;
};

struct BaselineConfig {
  bool random = true;
  bool full_set = true;
  bool gaussian = true;
  bool gmm10 = true;
  bool gmm50 = true;
  bool svm = true;
  bool gp = true;
  bool bayes = false;
  BayesOptions bayes_options{};
  std::size_t gp_max_train = 1000;
};

struct ExperimentConfig {
  EnvironmentConfig env;
  std::size_t n = 1000;
  std::size_t s = 100;
  double epsilon = 0.3;
  std::size_t m = 100;
  GanConfig gan{};
  BoostSchedule boost{1, 0.5, 0.1, 5};
  BaselineConfig baselines{};
  std::uint64_t seed = 0;
  unsigned workers = 0;  // 0: logical cores
  std::string out = "runs/default";

  // Throws ConfigError naming the offending field.
  void validate() const;
  static ExperimentConfig from_json(std::string_view text);
  static ExperimentConfig load(const std::string& path);
  // Canonical compact JSON; from_json(to_json()) reproduces the config.
  std::string to_json() const;
};

// Centers for `modes` basins in d dimensions: two modes sit at -/+0.5 on
// the diagonal, more modes on corners of the [-0.5,0.5] cube.
std::vector<Vector> default_basin_centers(std::size_t dims, std::size_t modes);

EnvironmentPtr make_environment(const ExperimentConfig& config);

}  // namespace bbgan
