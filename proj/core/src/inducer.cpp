#include "bbgan/inducer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>
#include <set>
#include <sstream>

#include "bbgan/error.hpp"
#include "bbgan/logging.hpp"

namespace bbgan {

std::string Origin::to_string() const {
  switch (kind) {
    case Kind::Uniform: return "uniform";
    case Kind::Generated: return "generated:" + std::to_string(stage);
    case Kind::Baseline: return "baseline";
  }
  return "uniform";
}

Origin Origin::parse(std::string_view text) {
  if (text == "uniform") return uniform();
  if (text == "baseline") return baseline();
  constexpr std::string_view prefix = "generated:";
  if (text.substr(0, prefix.size()) == prefix) {
    int stage = 0;
    const auto rest = text.substr(prefix.size());
    const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), stage);
    if (ec == std::errc() && ptr == rest.data() + rest.size()) return generated(stage);
  }
  throw CorruptionError("unknown sample origin '" + std::string(text) + "'");
}

std::size_t SampleSet::uniform_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(samples.begin(), samples.end(), [](const ScoredSample& s) {
    return s.origin.kind == Origin::Kind::Uniform;
  }));
}

std::vector<Vector> InducedSet::points() const {
  std::vector<Vector> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.mu);
  return out;
}

SampleSet build_omega(const Environment& env, std::size_t n, SeededSampler& rng, unsigned workers) {
  if (n == 0) throw RangeError("omega needs at least one sample");
  const auto& space = env.space();
  std::vector<Vector> normalized;
  normalized.reserve(n);
  std::set<Vector> seen;
  while (normalized.size() < n) {
    Vector p(space.dims());
    for (double& v : p) v = rng.uniform(-1.0, 1.0);
    if (!seen.insert(p).second) continue;
    normalized.push_back(std::move(p));
  }
  std::vector<Vector> raw;
  raw.reserve(n);
  for (const auto& p : normalized) raw.push_back(space.denormalize(p));
  const auto q = evaluate_all(env, raw, workers);

  SampleSet omega{space, {}};
  omega.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) omega.samples.push_back({std::move(normalized[i]), q[i], Origin::uniform()});
  return omega;
}

InducedSet induce(const SampleSet& omega, std::size_t s, double epsilon, std::size_t min_qualifying) {
  if (s == 0) throw RangeError("induced set size must be at least 1");
  std::vector<std::size_t> qualifying;
  for (std::size_t i = 0; i < omega.samples.size(); ++i) {
    if (omega.samples[i].q <= epsilon) qualifying.push_back(i);
  }
  if (qualifying.empty()) {
    throw EmptyInducedSetError("no sample among " + std::to_string(omega.size()) + " scores at or below epsilon = " +
                               format_double(epsilon));
  }
  if (qualifying.size() < min_qualifying) {
    throw InsufficientInducedSetError("only " + std::to_string(qualifying.size()) +
                                          " samples score at or below epsilon; at least " +
                                          std::to_string(min_qualifying) + " are required",
                                      qualifying.size());
  }
  auto less = [&](std::size_t a, std::size_t b) {
    const auto& x = omega.samples[a];
    const auto& y = omega.samples[b];
    if (x.q != y.q) return x.q < y.q;
    if (x.mu != y.mu) return std::lexicographical_compare(x.mu.begin(), x.mu.end(), y.mu.begin(), y.mu.end());
    return a < b;
  };
  const std::size_t take = std::min(s, qualifying.size());
  std::partial_sort(qualifying.begin(), qualifying.begin() + static_cast<std::ptrdiff_t>(take), qualifying.end(),
                    less);

  InducedSet induced{omega.space, {}, s, epsilon, take < s};
  induced.samples.reserve(take);
  for (std::size_t i = 0; i < take; ++i) induced.samples.push_back(omega.samples[qualifying[i]]);
  if (induced.shortfall) {
    log_warning("induced set short: " + std::to_string(take) + " of " + std::to_string(s) +
                " requested samples score at or below epsilon");
  }
  return induced;
}

void BoostSchedule::validate() const {
  if (stages == 0) throw ConfigError("boost.stages", "must be at least 1");
  if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("boost.rate", "must lie in [0, 1]");
  if (replication == 0) throw ConfigError("boost.replication", "must be at least 1");
  if (!practical()) return;
  if (!(practical_fraction > 0.0 && practical_fraction <= 1.0)) {
    throw ConfigError("boost.practical_fraction", "must lie in (0, 1]");
  }
  const double effective = practical_fraction * static_cast<double>(replication);
  if (std::abs(effective - rate) > 0.1 * rate) {
    throw ConfigError("boost.replication", "practical_fraction * replication must be within 10% of rate");
  }
}

std::size_t BoostSchedule::additions(std::size_t n) const {
  if (practical()) return evaluations(n) * replication;
  return static_cast<std::size_t>(std::floor(rate * static_cast<double>(n)));
}

std::size_t BoostSchedule::evaluations(std::size_t n) const {
  if (!practical()) return additions(n);
  return static_cast<std::size_t>(std::floor(practical_fraction * static_cast<double>(n)));
}

SampleSet boost_update(const SampleSet& previous, const ParameterGenerator& generator, const Environment& env,
                       const BoostSchedule& schedule, int stage, SeededSampler& rng, unsigned workers) {
  schedule.validate();
  SampleSet next = previous;
  const std::size_t n = previous.uniform_count();
  const std::size_t fresh = schedule.evaluations(n);
  if (fresh == 0) return next;
  const std::size_t copies = schedule.practical() ? schedule.replication : 1;

  auto points = generator.sample(fresh, rng);
  std::vector<Vector> raw;
  raw.reserve(points.size());
  for (const auto& p : points) raw.push_back(env.space().denormalize(p));
  const auto q = evaluate_all(env, raw, workers);

  next.samples.reserve(next.samples.size() + fresh * copies);
  for (std::size_t i = 0; i < fresh; ++i) {
    for (std::size_t c = 0; c < copies; ++c) next.samples.push_back({points[i], q[i], Origin::generated(stage)});
  }
  return next;
}

// ---------------------------------------------------------------------------

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  if (ec != std::errc()) throw Error("could not format double");
  return std::string(buffer, ptr);
}

double parse_double(std::string_view text) {
  if (text == "nan") return std::nan("");
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw CorruptionError("'" + std::string(text) + "' is not a number");
  }
  return value;
}

std::string to_csv(std::span<const ScoredSample> samples, std::size_t dims) {
  std::string out = "index,origin,q";
  for (std::size_t i = 0; i < dims; ++i) out += ",mu_" + std::to_string(i);
  out += '\n';
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& s = samples[k];
    if (s.mu.size() != dims) throw DimensionError("sample " + std::to_string(k) + " has the wrong dimension");
    out += std::to_string(k);
    out += ',';
    out += s.origin.to_string();
    out += ',';
    out += format_double(s.q);
    for (double v : s.mu) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    parts.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

std::vector<ScoredSample> samples_from_csv(std::string_view text, std::size_t dims) {
  std::vector<ScoredSample> out;
  std::size_t line_no = 0;
  bool header = true;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != dims + 3) {
      throw CorruptionError("CSV line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                            " columns, expected " + std::to_string(dims + 3));
    }
    if (header) {
      if (cells[0] != "index" || cells[1] != "origin" || cells[2] != "q") {
        throw CorruptionError("CSV header must start with index,origin,q");
      }
      header = false;
      continue;
    }
    ScoredSample s;
    s.origin = Origin::parse(cells[1]);
    s.q = parse_double(cells[2]);
    s.mu.reserve(dims);
    for (std::size_t i = 0; i < dims; ++i) s.mu.push_back(parse_double(cells[3 + i]));
    out.push_back(std::move(s));
  }
  if (header) throw CorruptionError("CSV has no header");
  return out;
}

namespace {

nlohmann::ordered_json samples_json(const std::vector<ScoredSample>& samples) {
  auto arr = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    nlohmann::ordered_json s;
    s["index"] = i;
    s["origin"] = samples[i].origin.to_string();
    if (std::isfinite(samples[i].q)) {
      s["q"] = samples[i].q;
    } else {
      s["q"] = nullptr;
    }
    s["mu"] = samples[i].mu;
    arr.push_back(std::move(s));
  }
  return arr;
}

std::vector<ScoredSample> samples_from(const nlohmann::json& arr) {
  std::vector<ScoredSample> out;
  for (const auto& s : arr) {
    ScoredSample x;
    x.origin = Origin::parse(s.at("origin").get<std::string>());
    x.q = s.at("q").is_null() ? std::nan("") : s.at("q").get<double>();
    x.mu = s.at("mu").get<Vector>();
    out.push_back(std::move(x));
  }
  return out;
}

nlohmann::json parse_json(std::string_view text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CorruptionError(std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

std::string to_json(const SampleSet& set) {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["kind"] = "sample_set";
  j["space"] = nlohmann::ordered_json::parse(set.space.to_json());
  j["samples"] = samples_json(set.samples);
  return j.dump();
}

SampleSet sample_set_from_json(std::string_view text) {
  const auto j = parse_json(text);
  try {
    if (j.at("version").get<int>() != 1) throw MigrationError("unsupported sample set version");
    SampleSet set{ParameterSpace::from_json(j.at("space").dump()), samples_from(j.at("samples"))};
    return set;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptionError(std::string("malformed sample set: ") + e.what());
  }
}

std::string to_json(const InducedSet& set) {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["kind"] = "induced_set";
  j["space"] = nlohmann::ordered_json::parse(set.space.to_json());
  j["requested"] = set.requested;
  j["epsilon"] = set.epsilon;
  j["shortfall"] = set.shortfall;
  j["samples"] = samples_json(set.samples);
  return j.dump();
}

InducedSet induced_set_from_json(std::string_view text) {
  const auto j = parse_json(text);
  try {
    if (j.at("version").get<int>() != 1) throw MigrationError("unsupported induced set version");
    InducedSet set{ParameterSpace::from_json(j.at("space").dump()), samples_from(j.at("samples")),
                   j.at("requested").get<std::size_t>(), j.at("epsilon").get<double>(),
                   j.at("shortfall").get<bool>()};
    return set;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptionError(std::string("malformed induced set: ") + e.what());
  }
}

}  // namespace bbgan
