#include "bbgan/param_space.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "bbgan/error.hpp"

namespace bbgan {

namespace {
constexpr double kNormalizedSlack = 1e-12;
}

ParameterSpace::ParameterSpace(Vector lower, Vector upper, std::vector<std::string> names)
    : lower_(std::move(lower)), upper_(std::move(upper)), names_(std::move(names)) {
  if (lower_.empty()) throw DimensionError("parameter space needs at least one dimension");
  if (lower_.size() != upper_.size()) {
    throw DimensionError("lower has " + std::to_string(lower_.size()) + " entries but upper has " +
                         std::to_string(upper_.size()));
  }
  if (!names_.empty() && names_.size() != lower_.size()) {
    throw DimensionError("names has " + std::to_string(names_.size()) + " entries, expected " +
                         std::to_string(lower_.size()));
  }
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]) || !(lower_[i] < upper_[i])) {
      throw RangeError("dimension " + std::to_string(i) + " has degenerate or invalid bounds [" +
                           std::to_string(lower_[i]) + ", " + std::to_string(upper_[i]) + "]",
                       static_cast<std::ptrdiff_t>(i));
    }
  }
}

ParameterSpace ParameterSpace::unit_box(std::size_t dims) {
  return ParameterSpace(Vector(dims, -1.0), Vector(dims, 1.0));
}

bool ParameterSpace::contains(std::span<const double> raw) const {
  if (raw.size() != dims()) return false;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!(raw[i] >= lower_[i] && raw[i] <= upper_[i])) return false;
  }
  return true;
}

void ParameterSpace::check(std::span<const double> raw) const {
  if (raw.size() != dims()) {
    throw DimensionError("expected " + std::to_string(dims()) + " parameters, got " +
                         std::to_string(raw.size()));
  }
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!(raw[i] >= lower_[i] && raw[i] <= upper_[i])) {
      const std::string label = names_.empty() ? std::to_string(i) : std::to_string(i) + " (" + names_[i] + ")";
      throw RangeError("dimension " + label + " value " + std::to_string(raw[i]) + " outside [" +
                           std::to_string(lower_[i]) + ", " + std::to_string(upper_[i]) + "]",
                       static_cast<std::ptrdiff_t>(i));
    }
  }
}

Vector ParameterSpace::normalize(std::span<const double> raw) const {
  check(raw);
  Vector out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out[i] = 2.0 * (raw[i] - lower_[i]) / (upper_[i] - lower_[i]) - 1.0;
  }
  return out;
}

Vector ParameterSpace::denormalize(std::span<const double> normalized) const {
  if (normalized.size() != dims()) {
    throw DimensionError("expected " + std::to_string(dims()) + " normalized parameters, got " +
                         std::to_string(normalized.size()));
  }
  Vector out(normalized.size());
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    const double v = normalized[i];
    if (!(v >= -1.0 - kNormalizedSlack && v <= 1.0 + kNormalizedSlack)) {
      throw RangeError("normalized dimension " + std::to_string(i) + " value " + std::to_string(v) +
                           " outside [-1, 1]",
                       static_cast<std::ptrdiff_t>(i));
    }
    const double raw = lower_[i] + (v + 1.0) * 0.5 * (upper_[i] - lower_[i]);
    out[i] = std::clamp(raw, lower_[i], upper_[i]);
  }
  return out;
}

std::string ParameterSpace::to_json() const {
  nlohmann::ordered_json j;
  j["dims"] = dims();
  j["lower"] = lower_;
  j["upper"] = upper_;
  j["names"] = names_;
  return j.dump();
}

ParameterSpace ParameterSpace::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("space", std::string("invalid JSON: ") + e.what());
  }
  try {
    auto lower = j.at("lower").get<Vector>();
    auto upper = j.at("upper").get<Vector>();
    std::vector<std::string> names;
    if (j.contains("names")) names = j.at("names").get<std::vector<std::string>>();
    if (j.contains("dims") && j.at("dims").get<std::size_t>() != lower.size()) {
      throw ConfigError("space.dims", "does not match the length of lower");
    }
    return ParameterSpace(std::move(lower), std::move(upper), std::move(names));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("space", e.what());
  }
}

std::vector<Vector> sample_uniform(const ParameterSpace& space, std::size_t n, SeededSampler& rng) {
  std::vector<Vector> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Vector p(space.dims());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = rng.uniform(space.lower()[i], space.upper()[i]);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Vector> sample_uniform_normalized(std::size_t dims, std::size_t n, SeededSampler& rng) {
  std::vector<Vector> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Vector p(dims);
    for (double& v : p) v = rng.uniform(-1.0, 1.0);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace bbgan
