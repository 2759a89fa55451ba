#include "bbgan/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "bbgan/error.hpp"

namespace bbgan {

using ojson = nlohmann::ordered_json;

Diversity diversity(std::span<const Vector> samples) {
  if (samples.size() < 2) throw ConfigError("diversity", "needs at least 2 samples");
  const std::size_t d = samples.front().size();
  Diversity out;
  out.per_dim.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    // Welford: exactly zero for a constant column.
    double mean = 0.0, ss = 0.0, k = 0.0;
    for (const auto& s : samples) {
      if (s.size() != d) throw DimensionError("diversity samples have inconsistent dimensions");
      k += 1.0;
      const double delta = s[j] - mean;
      mean += delta / k;
      ss += delta * (s[j] - mean);
    }
    out.per_dim[j] = std::sqrt(ss / static_cast<double>(samples.size() - 1));
  }
  for (double v : out.per_dim) out.mu_std += v;
  out.mu_std /= static_cast<double>(d);
  return out;
}

namespace {

void finish(EvaluationReport& r, std::span<const Vector> points) {
  r.afr = r.m == 0 ? 0.0 : static_cast<double>(r.f) / static_cast<double>(r.m);
  if (points.size() >= 2) {
    const Diversity div = diversity(points);
    r.mu_std = div.mu_std;
    r.per_dim_std = div.per_dim;
  } else {
    r.mu_std = 0.0;
    r.per_dim_std.assign(points.empty() ? 0 : points.front().size(), 0.0);
  }
  r.collapse_alarm = r.mu_std < kCollapseThreshold;
}

// Non-finite scores appear only on failed records; store them as strings.
ojson number_or_string(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double read_number(const ojson& j) {
  if (j.is_string()) return parse_double(j.get<std::string>());
  return j.get<double>();
}

}  // namespace

EvaluationReport attack_fooling_rate(const Environment& env, std::span<const Vector> samples, std::string method,
                                     std::uint64_t seed, unsigned workers) {
  if (samples.empty()) throw ConfigError("M", "attack needs at least one sample");
  std::vector<Vector> raw;
  raw.reserve(samples.size());
  for (const auto& mu : samples) raw.push_back(env.space().denormalize(mu));
  const auto outcomes = evaluate_batch(env, raw, workers);

  EvaluationReport r;
  r.method = std::move(method);
  r.requested = samples.size();
  r.seed = seed;
  r.env = env.descriptor();
  r.epsilon = env.epsilon();
  r.records.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& o = outcomes[i];
    r.records.push_back({samples[i], o.ok ? o.q : std::numeric_limits<double>::quiet_NaN(), o.ok, o.error});
    if (!o.ok) {
      ++r.failed;
      continue;
    }
    ++r.m;
    if (o.q <= r.epsilon) ++r.f;
  }
  finish(r, samples);
  return r;
}

EvaluationReport report_from_scored(std::span<const ScoredSample> samples, double epsilon, std::string method,
                                    std::uint64_t seed, std::string env) {
  EvaluationReport r;
  r.method = std::move(method);
  r.requested = samples.size();
  r.m = samples.size();
  r.seed = seed;
  r.env = std::move(env);
  r.epsilon = epsilon;
  std::vector<Vector> points;
  points.reserve(samples.size());
  for (const auto& s : samples) {
    r.records.push_back({s.mu, s.q, true, {}});
    points.push_back(s.mu);
    if (s.q <= epsilon) ++r.f;
  }
  finish(r, points);
  return r;
}

std::string EvaluationReport::to_json() const {
  ojson j;
  j["version"] = 1;
  j["method"] = method;
  j["env"] = env;
  j["seed"] = seed;
  j["epsilon"] = epsilon;
  j["requested"] = requested;
  j["M"] = m;
  j["f"] = f;
  j["failed"] = failed;
  j["afr"] = afr;
  j["mu_std"] = mu_std;
  j["per_dim_std"] = per_dim_std;
  j["collapse_alarm"] = collapse_alarm;
  ojson recs = ojson::array();
  for (const auto& rec : records) {
    ojson x;
    x["mu"] = rec.mu;
    x["q"] = number_or_string(rec.q);
    x["ok"] = rec.ok;
    if (!rec.error.empty()) x["error"] = rec.error;
    recs.push_back(std::move(x));
  }
  j["records"] = std::move(recs);
  return j.dump(1) + "\n";
}

EvaluationReport EvaluationReport::from_json(std::string_view text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const std::exception& e) {
    throw CorruptionError(std::string("report is not valid JSON: ") + e.what());
  }
  if (!j.contains("version") || j["version"] != 1) throw MigrationError("unsupported report version");
  try {
    EvaluationReport r;
    r.method = j.at("method").get<std::string>();
    r.env = j.at("env").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.epsilon = j.at("epsilon").get<double>();
    r.requested = j.at("requested").get<std::size_t>();
    r.m = j.at("M").get<std::size_t>();
    r.f = j.at("f").get<std::size_t>();
    r.failed = j.at("failed").get<std::size_t>();
    r.afr = j.at("afr").get<double>();
    r.mu_std = j.at("mu_std").get<double>();
    r.per_dim_std = j.at("per_dim_std").get<Vector>();
    r.collapse_alarm = j.at("collapse_alarm").get<bool>();
    for (const auto& x : j.at("records")) {
      SampleRecord rec;
      rec.mu = x.at("mu").get<Vector>();
      rec.q = read_number(x.at("q"));
      rec.ok = x.at("ok").get<bool>();
      if (x.contains("error")) rec.error = x["error"].get<std::string>();
      r.records.push_back(std::move(rec));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptionError(std::string("malformed report: ") + e.what());
  }
}

std::string format_percent(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", rate * 100.0);
  return buf;
}

std::string comparison_csv(std::span<const EvaluationReport> reports) {
  std::string out = "method,M,f,failed,afr,mu_std\n";
  for (const auto& r : reports) {
    out += r.method + ',' + std::to_string(r.m) + ',' + std::to_string(r.f) + ',' + std::to_string(r.failed) + ',' +
           format_double(r.afr) + ',' + format_double(r.mu_std) + '\n';
  }
  return out;
}

std::string comparison_text(std::span<const EvaluationReport> reports) {
  std::size_t width = 6;
  for (const auto& r : reports) width = std::max(width, r.method.size());
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s  %8s  %8s\n", static_cast<int>(width), "method", "FR", "mu_std");
  out << buf;
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%-*s  %8s  %8.3f\n", static_cast<int>(width), r.method.c_str(),
                  format_percent(r.afr).c_str(), r.mu_std);
    out << buf;
  }
  return out.str();
}

NoveltyReport nearest_neighbor(std::span<const Vector> generated, std::span<const Vector> training) {
  if (generated.empty() || training.empty()) throw ConfigError("nearest_neighbor", "both sets must be non-empty");
  const std::size_t d = training.front().size();
  NoveltyReport out;
  out.distances.reserve(generated.size());
  for (const auto& g : generated) {
    if (g.size() != d) throw DimensionError("generated and training points differ in dimension");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& t : training) {
      if (t.size() != d) throw DimensionError("training points have inconsistent dimensions");
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += (g[j] - t[j]) * (g[j] - t[j]);
      best = std::min(best, s);
    }
    out.distances.push_back(std::sqrt(best));
  }
  out.min = *std::min_element(out.distances.begin(), out.distances.end());
  out.max = *std::max_element(out.distances.begin(), out.distances.end());
  for (double v : out.distances) out.mean += v;
  out.mean /= static_cast<double>(out.distances.size());
  return out;
}

double mode_coverage(const BasinEnvironment& env, std::span<const Vector> samples) {
  std::vector<bool> hit(env.centers().size(), false);
  for (const auto& mu : samples) {
    if (auto mode = env.mode_of(env.space().denormalize(mu))) hit[*mode] = true;
  }
  return static_cast<double>(std::count(hit.begin(), hit.end(), true)) / static_cast<double>(hit.size());
}

std::vector<ProbeRow> convergence_probe(const BasinEnvironment& env, const ProbeOptions& options) {
  if (options.schedule.empty()) throw ConfigError("probe.schedule", "must list at least one N");
  const std::size_t largest = *std::max_element(options.schedule.begin(), options.schedule.end());
  SeededSampler rng(options.seed, streams::kOmega);
  const SampleSet full = build_omega(env, largest, rng, options.workers);

  std::vector<ProbeRow> rows;
  for (std::size_t n : options.schedule) {
    SampleSet prefix{full.space, {full.samples.begin(), full.samples.begin() + static_cast<std::ptrdiff_t>(n)}};
    const InducedSet induced = induce(prefix, options.s, env.epsilon());
    ProbeRow row{n, options.seed, induced.size(), mode_coverage(env, induced.points()), 0.0, 0.0};
    if (options.train) {
      GanConfig cfg = options.gan;
      cfg.seed = hash_combine(options.seed, n);
      const GanResult gan = train_gan(induced, cfg);
      SeededSampler attack_rng(options.seed, streams::kAttack);
      const auto generated = gan.adversary.sample(options.attack_samples, attack_rng);
      row.generated_coverage = mode_coverage(env, generated);
      row.afr = attack_fooling_rate(env, generated, "bbgan", options.seed, options.workers).afr;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string probe_csv(std::span<const ProbeRow> rows) {
  std::string out = "N,seed,induced,induced_coverage,generated_coverage,afr\n";
  for (const auto& r : rows) {
    out += std::to_string(r.n) + ',' + std::to_string(r.seed) + ',' + std::to_string(r.induced) + ',' +
           format_double(r.induced_coverage) + ',' + format_double(r.generated_coverage) + ',' + format_double(r.afr) +
           '\n';
  }
  return out;
}

std::string svg_histogram(std::span<const double> generated, std::span<const double> random, double epsilon,
                          std::size_t bins) {
  if (bins == 0) throw ConfigError("bins", "must be at least 1");
  auto counts = [&](std::span<const double> qs) {
    std::vector<double> c(bins, 0.0);
    std::size_t total = 0;
    for (double q : qs) {
      if (!std::isfinite(q)) continue;
      c[std::min(bins - 1, static_cast<std::size_t>(std::clamp(q, 0.0, 1.0) * static_cast<double>(bins)))] += 1.0;
      ++total;
    }
    if (total > 0) {
      for (auto& v : c) v /= static_cast<double>(total);
    }
    return c;
  };
  const auto g = counts(generated);
  const auto r = counts(random);
  double peak = 1e-9;
  for (std::size_t i = 0; i < bins; ++i) peak = std::max({peak, g[i], r[i]});

  constexpr double width = 400.0, height = 200.0, margin = 20.0;
  const double bw = (width - 2 * margin) / static_cast<double>(bins);
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height + 20 << "\">\n";
  auto bars = [&](const std::vector<double>& c, const char* colour) {
    for (std::size_t i = 0; i < bins; ++i) {
      const double h = (height - 2 * margin) * c[i] / peak;
      svg << "  <rect x=\"" << margin + bw * static_cast<double>(i) << "\" y=\"" << height - margin - h
          << "\" width=\"" << bw << "\" height=\"" << h << "\" fill=\"" << colour << "\" fill-opacity=\"0.5\"/>\n";
    }
  };
  bars(r, "#888888");
  bars(g, "#d62728");
  const double ex = margin + (width - 2 * margin) * std::clamp(epsilon, 0.0, 1.0);
  svg << "  <line x1=\"" << ex << "\" y1=\"" << margin << "\" x2=\"" << ex << "\" y2=\"" << height - margin
      << "\" stroke=\"black\" stroke-dasharray=\"4\"/>\n";
  svg << "  <text x=\"" << margin << "\" y=\"" << height + 10 << "\" font-size=\"10\">Q (red: generated, grey: random)</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace bbgan
