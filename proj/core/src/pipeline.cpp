#include "bbgan/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bbgan/baselines.hpp"
#include "bbgan/error.hpp"
#include "bbgan/logging.hpp"
#include "bbgan/parallel.hpp"

namespace bbgan {

namespace {

std::string summary_rate(std::size_t f, std::size_t m) {
  return std::to_string(f) + "/" + std::to_string(m) + " fooling (" +
         format_percent(m == 0 ? 0.0 : static_cast<double>(f) / static_cast<double>(m)) + ")";
}

}  // namespace

std::string boost_method(int stage) { return "bbgan-boost-" + std::to_string(stage); }

std::vector<std::string> method_order(std::size_t boost_stages) {
  std::vector<std::string> out{"full-set", "random", "gaussian", "gmm10", "gmm50", "svm", "gp", "bayes", "bbgan"};
  for (std::size_t k = 1; k <= boost_stages; ++k) out.push_back(boost_method(static_cast<int>(k)));
  return out;
}

Pipeline::Pipeline(ExperimentConfig config) : Pipeline(config, make_environment(config)) {}

Pipeline::Pipeline(ExperimentConfig config, EnvironmentPtr env)
    : config_(std::move(config)),
      env_(std::move(env)),
      store_(RunStore::open_or_create(config_.out, config_.to_json(), config_.seed)),
      workers_(resolve_workers(config_.workers)) {
  config_.validate();
}

SampleSet Pipeline::load_omega(int stage) const {
  return load_samples(store_, layout::omega(stage), env_->space());
}

std::string Pipeline::sample() {
  SeededSampler rng(config_.seed, streams::kOmega);
  log_info("sampling " + std::to_string(config_.n) + " uniform parameters");
  const SampleSet omega = build_omega(*env_, config_.n, rng, workers_);
  save_samples(store_, layout::omega(0), omega);
  const auto f = static_cast<std::size_t>(std::count_if(omega.samples.begin(), omega.samples.end(),
                                                        [&](const auto& s) { return s.q <= env_->epsilon(); }));
  return "sample: N=" + std::to_string(omega.size()) + ", " + summary_rate(f, omega.size()) + " -> " +
         layout::omega(0);
}

std::string Pipeline::induce(int stage) {
  const SampleSet omega = load_omega(stage);
  const InducedSet induced = bbgan::induce(omega, config_.s, env_->epsilon(), kMinInducedForTraining);
  save_induced(store_, layout::induced(stage), induced);
  return "induce: stage " + std::to_string(stage) + ", " + std::to_string(induced.size()) + "/" +
         std::to_string(config_.s) + " samples" + (induced.shortfall ? " (shortfall)" : "") + ", max q " +
         format_double(induced.samples.back().q) + " -> " + layout::induced(stage);
}

std::string Pipeline::train(int stage) {
  const InducedSet induced = load_induced(store_, layout::induced(stage));
  const GanConfig cfg = stage_config(config_.gan, config_.seed, stage);
  log_info("training stage " + std::to_string(stage) + " for " + std::to_string(cfg.epochs) + " epochs");
  const GanResult result = train_gan(induced, cfg);
  save_gan(store_, stage, result, cfg.seed);
  const auto& last = result.log.epochs.back();
  return "train: stage " + std::to_string(stage) + ", " + std::to_string(result.steps) + " steps, D(real) " +
         format_double(std::round(last.d_real * 1000) / 1000) + ", D(fake) " +
         format_double(std::round(last.d_fake * 1000) / 1000) + " -> gan/stage-" + std::to_string(stage) + "/";
}

std::string Pipeline::boost(int stage) {
  if (stage < 1 || static_cast<std::size_t>(stage) > config_.boost.stages) {
    throw ConfigError("--stage", "must lie in [1, " + std::to_string(config_.boost.stages) + "]");
  }
  const SampleSet previous = load_omega(stage - 1);
  const Adversary generator = load_adversary(store_, stage - 1, config_.gan.latent_dim);
  SeededSampler rng(config_.seed, streams::kBoostSampling + static_cast<std::uint64_t>(stage));
  const SampleSet next = boost_update(previous, generator, *env_, config_.boost, stage, rng, workers_);
  save_samples(store_, layout::omega(stage), next);
  const std::string induced = induce(stage);
  const std::string trained = train(stage);
  return "boost: stage " + std::to_string(stage) + ", " +
         std::to_string(config_.boost.evaluations(previous.uniform_count())) + " new evaluations, |Omega|=" +
         std::to_string(next.size()) + "; " + induced + "; " + trained;
}

std::vector<std::string> Pipeline::boost_all() {
  std::vector<std::string> out;
  for (std::size_t k = 1; k <= config_.boost.stages; ++k) out.push_back(boost(static_cast<int>(k)));
  return out;
}

int Pipeline::trained_stages() const {
  int k = 0;
  while (store_.has(layout::generator(k))) ++k;
  return k;
}

void Pipeline::save_attack(const std::string& method, const std::vector<Vector>& samples, Origin origin) {
  std::vector<ScoredSample> rows;
  rows.reserve(samples.size());
  for (const auto& mu : samples) rows.push_back({mu, std::numeric_limits<double>::quiet_NaN(), origin});
  store_.write(layout::attack(method), to_csv(rows, env_->space().dims()), schema::kSamples);
}

std::vector<Vector> Pipeline::load_attack(const std::string& method) const {
  std::vector<Vector> out;
  for (auto& s : samples_from_csv(store_.read(layout::attack(method), schema::kSamples), env_->space().dims())) {
    out.push_back(std::move(s.mu));
  }
  return out;
}

std::string Pipeline::attack() {
  const int stages = trained_stages();
  if (stages == 0) throw PrerequisiteError(layout::generator(0), "run `bbgan train` before `bbgan attack`");
  const std::size_t d = env_->space().dims();
  SeededSampler random_rng(config_.seed, streams::kRandomAttack);
  save_attack("random", random_attack(d, config_.m, random_rng), Origin::uniform());
  for (int k = 0; k < stages; ++k) {
    const Adversary g = load_adversary(store_, k, config_.gan.latent_dim);
    SeededSampler rng = SeededSampler(config_.seed, streams::kAttack).split(static_cast<std::uint64_t>(k));
    save_attack(k == 0 ? "bbgan" : boost_method(k), g.sample(config_.m, rng), Origin::generated(k));
  }
  return "attack: M=" + std::to_string(config_.m) + " samples for random and " + std::to_string(stages) +
         " adversary stage(s) -> eval/";
}

void Pipeline::evaluate_and_save(const std::string& method, const std::vector<Vector>& samples) {
  save_report(store_, attack_fooling_rate(*env_, samples, method, config_.seed, workers_));
}

std::string Pipeline::eval() {
  if (!store_.has(layout::attack("bbgan"))) {
    throw PrerequisiteError(layout::attack("bbgan"), "run `bbgan attack` before `bbgan eval`");
  }
  std::string out = "eval:";
  std::vector<double> generated_q, random_q;
  for (const auto& method : method_order(config_.boost.stages)) {
    if (method != "random" && method.rfind("bbgan", 0) != 0) continue;
    if (!store_.has(layout::attack(method))) continue;
    evaluate_and_save(method, load_attack(method));
    const EvaluationReport r = load_report(store_, method);
    out += " " + method + " " + format_percent(r.afr) + ";";
    // The histogram compares random against the last adversary stage.
    auto& sink = method == "random" ? random_q : generated_q;
    sink.clear();
    for (const auto& rec : r.records) sink.push_back(rec.q);
  }
  store_.write(layout::kHistogram, svg_histogram(generated_q, random_q, env_->epsilon()), schema::kPlot);
  out.pop_back();
  return out;
}

std::string Pipeline::baselines() {
  const auto& b = config_.baselines;
  const SampleSet omega = load_omega(0);
  std::string out = "baselines:";
  auto note = [&](const std::string& method) {
    out += " " + method + " " + format_percent(load_report(store_, method).afr) + ";";
  };
  if (b.full_set) {
    save_report(store_, report_from_scored(omega.samples, env_->epsilon(), "full-set", config_.seed,
                                           env_->descriptor()));
    note("full-set");
  }
  const SeededSampler base(config_.seed, streams::kBaselines);
  auto run = [&](const std::string& method, std::uint64_t index, auto&& attack_fn) {
    SeededSampler rng = base.split(index);
    const std::vector<Vector> samples = attack_fn(rng);
    save_attack(method, samples, Origin::baseline());
    evaluate_and_save(method, samples);
    note(method);
  };
  if (b.gaussian || b.gmm10 || b.gmm50) {
    const InducedSet induced = load_induced(store_, layout::induced(0));
    if (b.gaussian) run("gaussian", 1, [&](SeededSampler& r) { return gmm_attack(induced, 0.0, config_.m, r); });
    if (b.gmm10) run("gmm10", 2, [&](SeededSampler& r) { return gmm_attack(induced, 0.1, config_.m, r); });
    if (b.gmm50) run("gmm50", 3, [&](SeededSampler& r) { return gmm_attack(induced, 0.5, config_.m, r); });
  }
  if (b.svm) run("svm", 4, [&](SeededSampler& r) { return svm_rank_attack(omega, config_.m, r); });
  if (b.gp) {
    run("gp", 5, [&](SeededSampler& r) { return gp_rank_attack(omega, config_.m, r, GpOptions{}, b.gp_max_train); });
  }
  if (b.bayes) {
    run("bayes", 6, [&](SeededSampler& r) {
      BayesOptions o = b.bayes_options;
      o.attack_samples = config_.m;
      o.workers = workers_;
      const BayesResult result = bayesian_attack(*env_, o, r);
      SeededSampler draw = r.split(1000);
      return gmm_sample(result.model, config_.m, draw);
    });
  }
  if (out.back() == ';') out.pop_back();
  return out;
}

std::string Pipeline::report() {
  std::vector<EvaluationReport> reports;
  for (const auto& method : method_order(config_.boost.stages)) {
    if (store_.has(layout::report(method))) reports.push_back(load_report(store_, method));
  }
  if (reports.empty()) throw PrerequisiteError(layout::report("bbgan"), "run `bbgan eval` before `bbgan report`");
  const std::string text = comparison_text(reports);
  store_.write(layout::kReportCsv, comparison_csv(reports), schema::kTable);
  store_.write(layout::kReportText, text, schema::kTable);
  return text;
}

std::vector<std::string> Pipeline::full_run() {
  std::vector<std::string> out;
  out.push_back(sample());
  out.push_back(induce(0));
  out.push_back(train(0));
  for (auto& line : boost_all()) out.push_back(std::move(line));
  out.push_back(attack());
  out.push_back(eval());
  const auto& b = config_.baselines;
  if (b.full_set || b.gaussian || b.gmm10 || b.gmm50 || b.svm || b.gp || b.bayes) out.push_back(baselines());
  out.push_back(report());
  return out;
}

}  // namespace bbgan
