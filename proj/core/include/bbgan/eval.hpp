#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bbgan/envs.hpp"
#include "bbgan/gan.hpp"
#include "bbgan/inducer.hpp"

namespace bbgan {

inline constexpr double kCollapseThreshold = 0.01;

struct SampleRecord {
  Vector mu;  // normalized
  double q = 0.0;
  bool ok = true;
  std::string error;
  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

struct Diversity {
  double mu_std = 0.0;
  Vector per_dim;
};

// Unbiased per-dimension std and their mean. Needs at least 2 samples.
Diversity diversity(std::span<const Vector> samples);

struct EvaluationReport {
  std::string method;
  std::size_t requested = 0;  // samples submitted
  std::size_t m = 0;          // successful evaluations
  std::size_t f = 0;          // of which q <= epsilon
  std::size_t failed = 0;
  double afr = 0.0;
  double mu_std = 0.0;
  Vector per_dim_std;
  bool collapse_alarm = false;
  std::uint64_t seed = 0;
  std::string env;
  double epsilon = 0.0;
  std::vector<SampleRecord> records;

  std::string to_json() const;
  static EvaluationReport from_json(std::string_view text);
  friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

// Evaluates normalized attack samples and counts q <= epsilon. Failed
// evaluations are recorded and excluded from both f and M.
EvaluationReport attack_fooling_rate(const Environment& env, std::span<const Vector> samples, std::string method,
                                     std::uint64_t seed, unsigned workers = 1);

// Report over already-scored samples (no environment queries).
EvaluationReport report_from_scored(std::span<const ScoredSample> samples, double epsilon, std::string method,
                                    std::uint64_t seed, std::string env);

// "90.8%"
std::string format_percent(double rate);

// Comparison table, one row per report.
std::string comparison_csv(std::span<const EvaluationReport> reports);
std::string comparison_text(std::span<const EvaluationReport> reports);

struct NoveltyReport {
  std::vector<double> distances;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

// Exact L2 distance from each generated point to its nearest training point.
NoveltyReport nearest_neighbor(std::span<const Vector> generated, std::span<const Vector> training);

// Fraction of the environment's modes that at least one normalized sample
// falls into.
double mode_coverage(const BasinEnvironment& env, std::span<const Vector> samples);

struct ProbeRow {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::size_t induced = 0;
  double induced_coverage = 0.0;
  double generated_coverage = 0.0;  // 0 when training is disabled
  double afr = 0.0;                 // of generated samples; 0 when training is disabled
};

struct ProbeOptions {
  std::vector<std::size_t> schedule{250, 1000, 8000};
  std::size_t s = 100;
  bool train = false;
  GanConfig gan{};
  std::size_t attack_samples = 100;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

// For each N, induces from the first N points of one uniform stream (so the
// sets are nested) and measures mode coverage of the induced set and,
// optionally, of a generator trained on it.
std::vector<ProbeRow> convergence_probe(const BasinEnvironment& env, const ProbeOptions& options);
std::string probe_csv(std::span<const ProbeRow> rows);

// Overlaid q-score histograms, generated against random.
std::string svg_histogram(std::span<const double> generated, std::span<const double> random, double epsilon,
                          std::size_t bins = 20);

}  // namespace bbgan
