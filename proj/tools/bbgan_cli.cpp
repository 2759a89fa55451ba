#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "bbgan/error.hpp"
#include "bbgan/logging.hpp"
#include "bbgan/pipeline.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kOther = 1,
  kConfig = 2,
  kEvaluation = 3,
  kTraining = 4,
  kPrerequisite = 5,
};

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> workers;
  std::optional<int> stage;
  int verbose = 0;
  bool quiet = false;
};

bbgan::ExperimentConfig resolve(const Options& opts) {
  bbgan::ExperimentConfig cfg = bbgan::ExperimentConfig::load(opts.config);
  if (const char* root = std::getenv("BBGAN_RUN_ROOT"); root && *root) cfg.out = root;
  if (const char* w = std::getenv("BBGAN_WORKERS"); w && *w) {
    try {
      cfg.workers = static_cast<unsigned>(std::stoul(w));
    } catch (const std::exception&) {
      throw bbgan::ConfigError("BBGAN_WORKERS", "must be a non-negative integer");
    }
  }
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.out) cfg.out = *opts.out;
  if (opts.workers) cfg.workers = *opts.workers;
  cfg.validate();
  return cfg;
}

int run(const std::string& command, const Options& opts) {
  bbgan::Pipeline pipeline(resolve(opts));
  auto emit = [](const std::string& line) { std::cout << line << (line.ends_with('\n') ? "" : "\n"); };
  const int stage = opts.stage.value_or(0);
  if (command == "sample") {
    emit(pipeline.sample());
  } else if (command == "induce") {
    emit(pipeline.induce(stage));
  } else if (command == "train") {
    emit(pipeline.train(stage));
  } else if (command == "boost") {
    if (opts.stage) {
      emit(pipeline.boost(*opts.stage));
    } else {
      for (const auto& line : pipeline.boost_all()) emit(line);
    }
  } else if (command == "attack") {
    emit(pipeline.attack());
  } else if (command == "eval") {
    emit(pipeline.eval());
  } else if (command == "baselines") {
    emit(pipeline.baselines());
  } else if (command == "report") {
    emit(pipeline.report());
  } else if (command == "full-run") {
    for (const auto& line : pipeline.full_run()) emit(line);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Black-box GAN adversary: learn distributions of environment parameters that fool an agent"};
  app.require_subcommand(1);
  Options opts;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"sample", "Draw and score the uniform set Omega_0"},
      {"induce", "Select the lowest-scoring fooling samples of a stage"},
      {"train", "Train the adversary of a stage on its induced set"},
      {"boost", "Run boosting stages (all, or the one given by --stage)"},
      {"attack", "Sample attack parameters from random and every trained adversary"},
      {"eval", "Score attack samples and write per-method reports"},
      {"baselines", "Run the comparison baselines"},
      {"report", "Write the method comparison table"},
      {"full-run", "Run every stage in order"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opts.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", opts.seed, "Run seed, overrides the config");
    sub->add_option("--out", opts.out, "Run directory, overrides the config and BBGAN_RUN_ROOT");
    sub->add_option("--workers", opts.workers, "Evaluation workers (0: logical cores)");
    if (name == "induce" || name == "train" || name == "boost") {
      sub->add_option("--stage", opts.stage, "Boosting stage")->check(CLI::NonNegativeNumber);
    }
    sub->add_flag("-v,--verbose", opts.verbose, "More progress output on stderr (repeatable)");
    sub->add_flag("-q,--quiet", opts.quiet, "Errors only");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  bbgan::set_verbosity(opts.quiet          ? bbgan::Verbosity::Quiet
                       : opts.verbose >= 2 ? bbgan::Verbosity::Debug
                       : opts.verbose == 1 ? bbgan::Verbosity::Info
                                           : bbgan::Verbosity::Warnings);
  try {
    return run(command, opts);
  } catch (const bbgan::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const bbgan::PrerequisiteError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kPrerequisite;
  } catch (const bbgan::EvaluationError& e) {
    std::cerr << "evaluation error: " << e.what() << "\n";
    return kEvaluation;
  } catch (const bbgan::EvaluationAborted& e) {
    std::cerr << "evaluation error: " << e.what() << "\n";
    return kEvaluation;
  } catch (const bbgan::EmptyInducedSetError& e) {
    std::cerr << "training error: " << e.what() << "\n";
    return kTraining;
  } catch (const bbgan::InsufficientInducedSetError& e) {
    std::cerr << "training error: " << e.what() << "\n";
    return kTraining;
  } catch (const bbgan::TrainingError& e) {
    std::cerr << "training error: " << e.what() << "\n";
    return kTraining;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
}
