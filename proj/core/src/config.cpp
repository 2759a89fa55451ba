#include "bbgan/config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "bbgan/adapter.hpp"
#include "bbgan/error.hpp"
#include "bbgan/spline.hpp"

namespace bbgan {

using ojson = nlohmann::ordered_json;

namespace {

// Reads j[key] into out when present, tagging type errors with the field path.
template <typename T>
void read(const ojson& j, const char* key, T& out, const std::string& prefix) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(prefix + key, "has the wrong type");
  }
}

void reject_unknown(const ojson& j, std::initializer_list<std::string_view> known, const std::string& prefix) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || k == key;
    if (!ok) throw ConfigError(prefix + key, "is not a recognized field");
  }
}

ojson object_at(const ojson& j, const char* key, const std::string& prefix) {
  if (!j.contains(key)) return ojson::object();
  if (!j.at(key).is_object()) throw ConfigError(prefix + key, "must be an object");
  return j.at(key);
}

template <typename K, typename V>
std::map<K, V> read_map(const ojson& j, const char* key, const std::string& prefix) {
  std::map<K, V> out;
  const ojson obj = object_at(j, key, prefix);
  for (const auto& [k, v] : obj.items()) {
    try {
      out[static_cast<K>(std::stoull(k))] = v.template get<V>();
    } catch (const std::exception&) {
      throw ConfigError(prefix + key + "." + k, "must map a dimension index to a number");
    }
  }
  return out;
}

template <typename K, typename V>
ojson write_map(const std::map<K, V>& m) {
  ojson out = ojson::object();
  for (const auto& [k, v] : m) out[std::to_string(k)] = v;
  return out;
}

}  // namespace

std::vector<Vector> default_basin_centers(std::size_t dims, std::size_t modes) {
  std::vector<Vector> centers;
  if (modes == 2) {
    centers.push_back(Vector(dims, -0.5));
    centers.push_back(Vector(dims, 0.5));
    return centers;
  }
  for (std::size_t i = 0; i < modes; ++i) {
    Vector c(dims);
    for (std::size_t j = 0; j < dims; ++j) c[j] = ((i >> (j % 64)) & 1U) ? 0.5 : -0.5;
    centers.push_back(std::move(c));
  }
  return centers;
}

void ExperimentConfig::validate() const {
  const auto& e = env;
  if (e.type != "basin" && e.type != "track" && e.type != "pixel" && e.type != "adapter") {
    throw ConfigError("env.type", "must be one of basin, track, pixel, adapter; got '" + e.type + "'");
  }
  if (e.type == "basin") {
    if (e.basin.dims == 0) throw ConfigError("env.dims", "must be at least 1");
    if (e.basin.centers.empty() && e.basin.modes == 0) throw ConfigError("env.modes", "must be at least 1");
    if (e.basin.centers.empty() && e.basin.modes > 2 && e.basin.dims < 64 && e.basin.modes > (std::size_t{1} << e.basin.dims)) {
      throw ConfigError("env.modes", "exceeds the number of distinct default centers");
    }
    for (const auto& c : e.basin.centers) {
      if (c.size() != e.basin.dims) throw ConfigError("env.centers", "every center needs env.dims coordinates");
    }
    if (!(e.basin.fooling_fraction > 0.0 && e.basin.fooling_fraction < 1.0)) {
      throw ConfigError("env.fooling_fraction", "must lie in (0,1)");
    }
    if (e.basin.noise < 0.0) throw ConfigError("env.noise", "must be non-negative");
    if (e.basin.episodes == 0) throw ConfigError("env.episodes", "must be at least 1");
  } else if (e.type == "track") {
    if (e.track.anchors < 3 || e.track.anchors > 5) throw ConfigError("env.anchors", "must be 3, 4 or 5");
    if (e.track.gates < 2) throw ConfigError("env.gates", "must be at least 2");
    if (!(e.track.perturbation > 0.0)) throw ConfigError("env.perturbation", "must be positive");
    if (!(e.track.curvature_limit > 0.0)) throw ConfigError("env.curvature_limit", "must be positive");
    if (e.track.min_gate_gap < 0.0) throw ConfigError("env.min_gate_gap", "must be non-negative");
  } else if (e.type == "pixel") {
    if (e.pixel.side == 0) throw ConfigError("env.side", "must be at least 1");
    if (e.pixel.classes < 2) throw ConfigError("env.classes", "must be at least 2");
    if (!(e.pixel.noise_bound > 0.0)) throw ConfigError("env.noise_bound", "must be positive");
  } else {
    if (e.adapter.endpoint.empty()) throw ConfigError("env.endpoint", "is required for the adapter environment");
    if (e.adapter.lower.empty() || e.adapter.lower.size() != e.adapter.upper.size()) {
      throw ConfigError("env.lower", "lower and upper must be non-empty and of equal length");
    }
    if (!(e.adapter.timeout_seconds > 0.0)) throw ConfigError("env.timeout", "must be positive");
    if (e.adapter.episodes == 0) throw ConfigError("env.episodes", "must be at least 1");
    if (e.adapter.pool_size == 0) throw ConfigError("env.pool", "must be at least 1");
  }
  if (n == 0) throw ConfigError("N", "must be at least 1");
  if (s == 0) throw ConfigError("s", "must be at least 1");
  if (s > n) throw ConfigError("s", "must not exceed N");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon", "must lie in (0,1)");
  if (m == 0) throw ConfigError("M", "must be at least 1");
  if (gan.latent_dim == 0) throw ConfigError("gan.latent_dim", "must be at least 1");
  if (gan.hidden_units == 0) throw ConfigError("gan.hidden_units", "must be at least 1");
  if (gan.epochs == 0) throw ConfigError("gan.epochs", "must be at least 1");
  if (gan.batch_size == 0) throw ConfigError("gan.batch_size", "must be at least 1");
  if (gan.batch_size > s) throw ConfigError("gan.batch_size", "must not exceed s");
  if (!(gan.optimizer.learning_rate > 0.0)) throw ConfigError("gan.learning_rate", "must be positive");
  if (!(gan.ema_decay >= 0.0 && gan.ema_decay < 1.0)) throw ConfigError("gan.ema_decay", "must lie in [0,1)");
  boost.validate();
  if (baselines.bayes) {
    const auto& b = baselines.bayes_options;
    if (b.steps < b.tail) throw ConfigError("baselines.bayes_steps", "must be at least baselines.bayes_tail");
    if (b.window < 2) throw ConfigError("baselines.bayes_window", "must be at least 2");
    if (b.pool == 0) throw ConfigError("baselines.bayes_pool", "must be at least 1");
  }
}

ExperimentConfig ExperimentConfig::from_json(std::string_view text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("<config>", std::string("is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("<config>", "must be a JSON object");
  reject_unknown(j, {"env", "N", "s", "epsilon", "M", "gan", "boost", "baselines", "seed", "workers", "out"}, "");

  ExperimentConfig c;
  const ojson env = object_at(j, "env", "");
  auto& e = c.env;
  read(env, "type", e.type, "env.");
  e.freeze = read_map<std::size_t, double>(env, "freeze", "env.");
  if (e.type == "basin") {
    reject_unknown(env, {"type", "freeze", "dims", "modes", "centers", "fooling_fraction", "noise", "episodes", "seed"},
                   "env.");
    read(env, "dims", e.basin.dims, "env.");
    read(env, "modes", e.basin.modes, "env.");
    read(env, "centers", e.basin.centers, "env.");
    read(env, "fooling_fraction", e.basin.fooling_fraction, "env.");
    read(env, "noise", e.basin.noise, "env.");
    read(env, "episodes", e.basin.episodes, "env.");
    read(env, "seed", e.basin.seed, "env.");
  } else if (e.type == "track") {
    reject_unknown(env, {"type", "freeze", "anchors", "perturbation", "gates", "curvature_limit", "min_gate_gap"},
                   "env.");
    read(env, "anchors", e.track.anchors, "env.");
    read(env, "perturbation", e.track.perturbation, "env.");
    read(env, "gates", e.track.gates, "env.");
    read(env, "curvature_limit", e.track.curvature_limit, "env.");
    read(env, "min_gate_gap", e.track.min_gate_gap, "env.");
  } else if (e.type == "pixel") {
    reject_unknown(env, {"type", "freeze", "side", "classes", "noise_bound", "clean_logit_gap", "weight_scale", "seed"},
                   "env.");
    read(env, "side", e.pixel.side, "env.");
    read(env, "classes", e.pixel.classes, "env.");
    read(env, "noise_bound", e.pixel.noise_bound, "env.");
    read(env, "clean_logit_gap", e.pixel.clean_logit_gap, "env.");
    read(env, "weight_scale", e.pixel.weight_scale, "env.");
    read(env, "seed", e.pixel.seed, "env.");
  } else if (e.type == "adapter") {
    reject_unknown(env, {"type", "freeze", "endpoint", "lower", "upper", "names", "timeout", "episodes", "pool",
                         "categorical"},
                   "env.");
    read(env, "endpoint", e.adapter.endpoint, "env.");
    read(env, "lower", e.adapter.lower, "env.");
    read(env, "upper", e.adapter.upper, "env.");
    read(env, "names", e.adapter.names, "env.");
    read(env, "timeout", e.adapter.timeout_seconds, "env.");
    read(env, "episodes", e.adapter.episodes, "env.");
    read(env, "pool", e.adapter.pool_size, "env.");
    e.adapter.categorical = read_map<std::size_t, std::size_t>(env, "categorical", "env.");
  }

  read(j, "N", c.n, "");
  read(j, "s", c.s, "");
  read(j, "epsilon", c.epsilon, "");
  read(j, "M", c.m, "");
  read(j, "seed", c.seed, "");
  read(j, "workers", c.workers, "");
  read(j, "out", c.out, "");

  const ojson gan = object_at(j, "gan", "");
  reject_unknown(gan, {"latent_dim", "hidden_units", "hidden_layers", "epochs", "batch_size", "learning_rate", "beta1",
                       "beta2", "ema_decay"},
                 "gan.");
  read(gan, "latent_dim", c.gan.latent_dim, "gan.");
  read(gan, "hidden_units", c.gan.hidden_units, "gan.");
  read(gan, "hidden_layers", c.gan.hidden_layers, "gan.");
  read(gan, "epochs", c.gan.epochs, "gan.");
  read(gan, "batch_size", c.gan.batch_size, "gan.");
  read(gan, "learning_rate", c.gan.optimizer.learning_rate, "gan.");
  read(gan, "beta1", c.gan.optimizer.beta1, "gan.");
  read(gan, "beta2", c.gan.optimizer.beta2, "gan.");
  read(gan, "ema_decay", c.gan.ema_decay, "gan.");

  const ojson boost = object_at(j, "boost", "");
  reject_unknown(boost, {"stages", "rate", "practical_fraction", "replication"}, "boost.");
  read(boost, "stages", c.boost.stages, "boost.");
  read(boost, "rate", c.boost.rate, "boost.");
  read(boost, "practical_fraction", c.boost.practical_fraction, "boost.");
  read(boost, "replication", c.boost.replication, "boost.");

  const ojson base = object_at(j, "baselines", "");
  reject_unknown(base, {"random", "full_set", "gaussian", "gmm10", "gmm50", "svm", "gp", "bayes", "bayes_steps",
                        "bayes_tail", "bayes_window", "bayes_pool", "bayes_initial", "bayes_xi", "bayes_components",
                        "gp_max_train"},
                 "baselines.");
  auto& b = c.baselines;
  read(base, "random", b.random, "baselines.");
  read(base, "full_set", b.full_set, "baselines.");
  read(base, "gaussian", b.gaussian, "baselines.");
  read(base, "gmm10", b.gmm10, "baselines.");
  read(base, "gmm50", b.gmm50, "baselines.");
  read(base, "svm", b.svm, "baselines.");
  read(base, "gp", b.gp, "baselines.");
  read(base, "bayes", b.bayes, "baselines.");
  read(base, "bayes_steps", b.bayes_options.steps, "baselines.");
  read(base, "bayes_tail", b.bayes_options.tail, "baselines.");
  read(base, "bayes_window", b.bayes_options.window, "baselines.");
  read(base, "bayes_pool", b.bayes_options.pool, "baselines.");
  read(base, "bayes_initial", b.bayes_options.initial, "baselines.");
  read(base, "bayes_xi", b.bayes_options.xi, "baselines.");
  read(base, "bayes_components", b.bayes_options.components, "baselines.");
  read(base, "gp_max_train", b.gp_max_train, "baselines.");

  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string ExperimentConfig::to_json() const {
  ojson env_j;
  env_j["type"] = env.type;
  if (!env.freeze.empty()) env_j["freeze"] = write_map(env.freeze);
  if (env.type == "basin") {
    env_j["dims"] = env.basin.dims;
    env_j["modes"] = env.basin.modes;
    if (!env.basin.centers.empty()) env_j["centers"] = env.basin.centers;
    env_j["fooling_fraction"] = env.basin.fooling_fraction;
    env_j["noise"] = env.basin.noise;
    env_j["episodes"] = env.basin.episodes;
    env_j["seed"] = env.basin.seed;
  } else if (env.type == "track") {
    env_j["anchors"] = env.track.anchors;
    env_j["perturbation"] = env.track.perturbation;
    env_j["gates"] = env.track.gates;
    env_j["curvature_limit"] = env.track.curvature_limit;
    env_j["min_gate_gap"] = env.track.min_gate_gap;
  } else if (env.type == "pixel") {
    env_j["side"] = env.pixel.side;
    env_j["classes"] = env.pixel.classes;
    env_j["noise_bound"] = env.pixel.noise_bound;
    env_j["clean_logit_gap"] = env.pixel.clean_logit_gap;
    env_j["weight_scale"] = env.pixel.weight_scale;
    env_j["seed"] = env.pixel.seed;
  } else {
    env_j["endpoint"] = env.adapter.endpoint;
    env_j["lower"] = env.adapter.lower;
    env_j["upper"] = env.adapter.upper;
    env_j["names"] = env.adapter.names;
    env_j["timeout"] = env.adapter.timeout_seconds;
    env_j["episodes"] = env.adapter.episodes;
    env_j["pool"] = env.adapter.pool_size;
    if (!env.adapter.categorical.empty()) env_j["categorical"] = write_map(env.adapter.categorical);
  }
  ojson j;
  j["env"] = std::move(env_j);
  j["N"] = n;
  j["s"] = s;
  j["epsilon"] = epsilon;
  j["M"] = m;
  j["gan"] = {{"latent_dim", gan.latent_dim},
              {"hidden_units", gan.hidden_units},
              {"hidden_layers", gan.hidden_layers},
              {"epochs", gan.epochs},
              {"batch_size", gan.batch_size},
              {"learning_rate", gan.optimizer.learning_rate},
              {"beta1", gan.optimizer.beta1},
              {"beta2", gan.optimizer.beta2},
              {"ema_decay", gan.ema_decay}};
  j["boost"] = {{"stages", boost.stages},
                {"rate", boost.rate},
                {"practical_fraction", boost.practical_fraction},
                {"replication", boost.replication}};
  const auto& b = baselines;
  j["baselines"] = {{"random", b.random},
                    {"full_set", b.full_set},
                    {"gaussian", b.gaussian},
                    {"gmm10", b.gmm10},
                    {"gmm50", b.gmm50},
                    {"svm", b.svm},
                    {"gp", b.gp},
                    {"bayes", b.bayes},
                    {"bayes_steps", b.bayes_options.steps},
                    {"bayes_tail", b.bayes_options.tail},
                    {"bayes_window", b.bayes_options.window},
                    {"bayes_pool", b.bayes_options.pool},
                    {"bayes_initial", b.bayes_options.initial},
                    {"bayes_xi", b.bayes_options.xi},
                    {"bayes_components", b.bayes_options.components},
                    {"gp_max_train", b.gp_max_train}};
  j["seed"] = seed;
  j["workers"] = workers;
  j["out"] = out;
  return j.dump();
}

EnvironmentPtr make_environment(const ExperimentConfig& config) {
  const auto& e = config.env;
  EnvironmentPtr env;
  if (e.type == "basin") {
    auto centers = e.basin.centers.empty() ? default_basin_centers(e.basin.dims, e.basin.modes) : e.basin.centers;
    env = std::make_shared<BasinEnvironment>(BasinEnvironment::with_fooling_fraction(
        std::move(centers), config.epsilon, e.basin.fooling_fraction,
        BasinEnvironment::Options{e.basin.episodes, e.basin.noise, e.basin.seed}));
  } else if (e.type == "track") {
    SplineTrackEnvironment::Options o;
    o.template_anchors = SplineTrackEnvironment::default_template(e.track.anchors);
    o.perturbation = e.track.perturbation;
    o.gate_count = e.track.gates;
    o.curvature_limit = e.track.curvature_limit;
    o.min_gate_gap = e.track.min_gate_gap;
    env = std::make_shared<SplineTrackEnvironment>(config.epsilon, std::move(o));
  } else if (e.type == "pixel") {
    PixelClassifierEnvironment::Options o;
    o.side = e.pixel.side;
    o.classes = e.pixel.classes;
    o.noise_bound = e.pixel.noise_bound;
    o.clean_logit_gap = e.pixel.clean_logit_gap;
    o.weight_scale = e.pixel.weight_scale;
    o.seed = e.pixel.seed;
    env = std::make_shared<PixelClassifierEnvironment>(config.epsilon, o);
  } else if (e.type == "adapter") {
    ExternalAdapterEnvironment::Options o;
    o.timeout_seconds = e.adapter.timeout_seconds;
    o.episodes = e.adapter.episodes;
    o.pool_size = e.adapter.pool_size;
    o.categorical = e.adapter.categorical;
    env = std::make_shared<ExternalAdapterEnvironment>(ParameterSpace(e.adapter.lower, e.adapter.upper, e.adapter.names),
                                                       config.epsilon, AdapterEndpoint::parse(e.adapter.endpoint), o);
  } else {
    throw ConfigError("env.type", "unknown environment '" + e.type + "'");
  }
  if (!e.freeze.empty()) return freeze(env, e.freeze);
  return env;
}

}  // namespace bbgan
