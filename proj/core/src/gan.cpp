#include "bbgan/gan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bbgan/logging.hpp"

namespace bbgan {

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<std::size_t> hidden_widths(const GanConfig& c) {
  return std::vector<std::size_t>(c.hidden_layers, c.hidden_units);
}

}  // namespace

GanConfig stage_config(const GanConfig& base, std::uint64_t run_seed, int stage) {
  GanConfig c = base;
  c.seed = hash_combine(run_seed, streams::kGanTraining + static_cast<std::uint64_t>(stage));
  return c;
}

std::string GanTrainLog::to_csv() const {
  std::string out = "epoch,d_loss,g_loss,d_real,d_fake\n";
  for (const auto& e : epochs) {
    out += std::to_string(e.epoch) + ',' + format_double(e.d_loss) + ',' + format_double(e.g_loss) + ',' +
           format_double(e.d_real) + ',' + format_double(e.d_fake) + '\n';
  }
  return out;
}

GanTrainLog GanTrainLog::from_csv(std::string_view text) {
  GanTrainLog log;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      if (line != "epoch,d_loss,g_loss,d_real,d_fake") throw CorruptionError("unexpected training log header");
      header = false;
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != 5) throw CorruptionError("training log row has " + std::to_string(cells.size()) + " cells");
    log.epochs.push_back({static_cast<std::size_t>(std::stoull(cells[0])), parse_double(cells[1]),
                          parse_double(cells[2]), parse_double(cells[3]), parse_double(cells[4])});
  }
  return log;
}

Adversary::Adversary(Mlp generator, std::size_t latent_dim)
    : generator_(std::move(generator)), latent_dim_(latent_dim) {
  if (latent_dim_ == 0) throw DimensionError("latent dimension must be at least 1");
  if (generator_.input_dim() != latent_dim_) throw DimensionError("generator input does not match latent dimension");
}

Eigen::MatrixXd Adversary::latent(std::size_t count, SeededSampler& rng) const {
  Eigen::MatrixXd z(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(latent_dim_));
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    for (Eigen::Index c = 0; c < z.cols(); ++c) z(r, c) = rng.normal();
  }
  return z;
}

std::vector<Vector> Adversary::sample(std::size_t count, SeededSampler& rng) const {
  const Eigen::MatrixXd out = generator_.forward(latent(count, rng));
  std::vector<Vector> samples(count, Vector(static_cast<std::size_t>(out.cols())));
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
      samples[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = std::clamp(out(r, c), -1.0, 1.0);
    }
  }
  return samples;
}

Discriminator::Discriminator(Mlp net) : net_(std::move(net)) {
  if (net_.output_dim() != 1) throw DimensionError("discriminator must have a single output");
}

Eigen::VectorXd Discriminator::probabilities(const Eigen::MatrixXd& batch) const {
  return net_.forward(batch).col(0).unaryExpr([](double v) { return sigmoid(v); });
}

namespace {

GanResult train(const std::vector<Vector>& real, const GanConfig& config, std::size_t nominal) {
  if (config.batch_size == 0) throw ConfigError("gan.batch_size", "must be at least 1");
  if (real.size() < config.batch_size) {
    throw TrainingError("training set of " + std::to_string(real.size()) + " samples is smaller than the batch size " +
                        std::to_string(config.batch_size));
  }
  const std::size_t d = real.front().size();
  for (const auto& p : real) {
    if (p.size() != d) throw DimensionError("training samples have inconsistent dimensions");
  }

  SeededSampler rng(config.seed, streams::kGanTraining);
  const auto widths = hidden_widths(config);
  Mlp g = Mlp::create(config.latent_dim, widths, d, Activation::LeakyRelu, Activation::Tanh, rng);
  Mlp dnet = Mlp::create(d, widths, 1, Activation::LeakyRelu, Activation::Identity, rng);
  Adam g_opt(g, config.optimizer);
  Adam d_opt(dnet, config.optimizer);

  Eigen::MatrixXd data(static_cast<Eigen::Index>(real.size()), static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < real.size(); ++r) {
    for (std::size_t c = 0; c < d; ++c) data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = real[r][c];
  }

  const std::size_t batch = config.batch_size;
  const auto b = static_cast<Eigen::Index>(batch);
  // An epoch is sized by the nominal set (the requested s for an induced
  // set), so a short set gets the same number of updates. Minibatches are
  // cut from a stream of reshuffled passes over the data.
  const std::size_t batches = (std::max(nominal, real.size()) + batch - 1) / batch;
  std::vector<std::size_t> order(real.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();

  Adversary helper(g, config.latent_dim);
  Mlp average = g;
  GanTrainLog log;
  log.epochs.reserve(config.epochs);
  std::string last_good = to_checkpoint(g, config.seed, 0);
  std::size_t steps = 0;
  Mlp::Cache g_cache, d_cache_real, d_cache_fake;
  Eigen::MatrixXd real_batch(b, static_cast<Eigen::Index>(d));

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    EpochStats stats{epoch, 0.0, 0.0, 0.0, 0.0};

    for (std::size_t k = 0; k < batches; ++k) {
      for (std::size_t i = 0; i < batch; ++i) {
        if (cursor == order.size()) {
          // Fisher-Yates with the seeded stream.
          for (std::size_t j = order.size(); j > 1; --j) std::swap(order[j - 1], order[rng.below(j)]);
          cursor = 0;
        }
        real_batch.row(static_cast<Eigen::Index>(i)) = data.row(static_cast<Eigen::Index>(order[cursor++]));
      }

      // Discriminator step.
      const Eigen::MatrixXd fake = g.forward(helper.latent(batch, rng));
      const Eigen::MatrixXd logit_real = dnet.forward(real_batch, d_cache_real);
      const Eigen::MatrixXd logit_fake = dnet.forward(fake, d_cache_fake);
      double d_loss = 0.0, d_real = 0.0, d_fake = 0.0;
      Eigen::MatrixXd grad_real(b, 1), grad_fake(b, 1);
      for (Eigen::Index i = 0; i < b; ++i) {
        const double lr = logit_real(i, 0);
        const double lf = logit_fake(i, 0);
        d_loss += softplus(-lr) + softplus(lf);
        d_real += sigmoid(lr);
        d_fake += sigmoid(lf);
        grad_real(i, 0) = (sigmoid(lr) - 1.0) / static_cast<double>(batch);
        grad_fake(i, 0) = sigmoid(lf) / static_cast<double>(batch);
      }
      d_loss /= static_cast<double>(batch);
      Gradients gd = dnet.backward(d_cache_real, grad_real);
      const Gradients gd_fake = dnet.backward(d_cache_fake, grad_fake);
      for (std::size_t l = 0; l < gd.weights.size(); ++l) {
        gd.weights[l] += gd_fake.weights[l];
        gd.bias[l] += gd_fake.bias[l];
      }
      if (!std::isfinite(d_loss)) throw TrainingDiverged("non-finite GAN loss at epoch " + std::to_string(epoch), last_good);
      try {
        d_opt.step(dnet, gd);
      } catch (const NonFiniteGradientError& e) {
        throw TrainingDiverged(std::string("GAN update rejected at epoch ") + std::to_string(epoch) + ": " + e.what(),
                               last_good);
      }

      // Generator step on fresh latents, non-saturating loss -log D(G(z)).
      const Eigen::MatrixXd generated = g.forward(helper.latent(batch, rng), g_cache);
      Mlp::Cache d_cache_gen;
      const Eigen::MatrixXd logit_gen = dnet.forward(generated, d_cache_gen);
      double g_loss = 0.0;
      Eigen::MatrixXd grad_gen(b, 1);
      for (Eigen::Index i = 0; i < b; ++i) {
        const double l = logit_gen(i, 0);
        g_loss += softplus(-l);
        grad_gen(i, 0) = (sigmoid(l) - 1.0) / static_cast<double>(batch);
      }
      g_loss /= static_cast<double>(batch);
      const Gradients through_d = dnet.backward(d_cache_gen, grad_gen);
      const Gradients gg = g.backward(g_cache, through_d.input);

      if (!std::isfinite(g_loss)) throw TrainingDiverged("non-finite GAN loss at epoch " + std::to_string(epoch), last_good);
      try {
        g_opt.step(g, gg);
      } catch (const NonFiniteGradientError& e) {
        throw TrainingDiverged(std::string("GAN update rejected at epoch ") + std::to_string(epoch) + ": " + e.what(),
                               last_good);
      }
      ++steps;
      if (config.ema_decay > 0.0) {
        const double keep = std::min(config.ema_decay, 1.0 - 1.0 / static_cast<double>(steps + 1));
        auto& avg = average.mutable_layers();
        for (std::size_t l = 0; l < avg.size(); ++l) {
          avg[l].weights = keep * avg[l].weights + (1.0 - keep) * g.layers()[l].weights;
          avg[l].bias = keep * avg[l].bias + (1.0 - keep) * g.layers()[l].bias;
        }
      }

      stats.d_loss += d_loss;
      stats.g_loss += g_loss;
      stats.d_real += d_real / static_cast<double>(batch);
      stats.d_fake += d_fake / static_cast<double>(batch);
    }
    const double nb = static_cast<double>(batches);
    stats.d_loss /= nb;
    stats.g_loss /= nb;
    stats.d_real /= nb;
    stats.d_fake /= nb;
    if (!g.all_finite() || !dnet.all_finite()) {
      throw TrainingDiverged("non-finite weights after epoch " + std::to_string(epoch), last_good);
    }
    log.epochs.push_back(stats);
    if ((epoch + 1) % 100 == 0 || epoch + 1 == config.epochs) last_good = to_checkpoint(g, config.seed, steps);
  }

  if (config.ema_decay > 0.0) g = std::move(average);
  return {Adversary(std::move(g), config.latent_dim), Discriminator(std::move(dnet)), std::move(log), steps};
}

}  // namespace

GanResult train_gan(const InducedSet& induced, const GanConfig& config) {
  return train(induced.points(), config, std::max(induced.requested, induced.size()));
}

GanResult train_gan(const std::vector<Vector>& real, const GanConfig& config) {
  return train(real, config, real.size());
}

Adversary adversary_from_checkpoint(std::string_view text, std::size_t latent_dim) {
  auto cp = from_checkpoint(text);
  return Adversary(std::move(cp.net), latent_dim);
}

BoostedRun train_boosted(const Environment& env, const BoostedOptions& options) {
  options.schedule.validate();
  BoostedRun run;
  SeededSampler omega_rng(options.seed, streams::kOmega);
  run.omegas.push_back(build_omega(env, options.n, omega_rng, options.workers));
  run.induced.push_back(induce(run.omegas.back(), options.s, env.epsilon(), kMinInducedForTraining));
  run.stages.push_back(train_gan(run.induced.back(), stage_config(options.gan, options.seed, 0)));

  for (std::size_t k = 1; k <= options.schedule.stages; ++k) {
    const int stage = static_cast<int>(k);
    SeededSampler boost_rng(options.seed, streams::kBoostSampling + k);
    run.omegas.push_back(boost_update(run.omegas.back(), run.stages.back().adversary, env, options.schedule,
                                      stage, boost_rng, options.workers));
    run.boost_evaluations.push_back(options.schedule.evaluations(run.omegas.front().uniform_count()));
    run.induced.push_back(induce(run.omegas.back(), options.s, env.epsilon(), kMinInducedForTraining));
    run.stages.push_back(train_gan(run.induced.back(), stage_config(options.gan, options.seed, stage)));
    log_info("boost stage " + std::to_string(k) + " trained on " + std::to_string(run.induced.back().size()) +
             " induced samples");
  }
  return run;
}

}  // namespace bbgan
