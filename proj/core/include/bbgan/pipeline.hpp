#pragma once

#include <string>
#include <vector>

#include "bbgan/config.hpp"
#include "bbgan/eval.hpp"
#include "bbgan/store.hpp"

namespace bbgan {

// Display order of methods in the comparison table.
std::vector<std::string> method_order(std::size_t boost_stages);
std::string boost_method(int stage);  // "bbgan-boost-<k>"

// Stage-by-stage experiment driver over one run directory. Each stage
// reads its inputs from the store, so stages can run in separate processes;
// each returns a one-line summary.
class Pipeline {
 public:
  Pipeline(ExperimentConfig config, EnvironmentPtr env);
  explicit Pipeline(ExperimentConfig config);

  const ExperimentConfig& config() const noexcept { return config_; }
  const Environment& environment() const noexcept { return *env_; }
  RunStore& store() noexcept { return store_; }
  unsigned workers() const noexcept { return workers_; }

  std::string sample();
  std::string induce(int stage = 0);
  std::string train(int stage = 0);
  // Omega_k from Omega_{k-1} and G_{k-1}, then induce and train stage k.
  std::string boost(int stage);
  std::vector<std::string> boost_all();
  // Attack samples for random and for every trained stage.
  std::string attack();
  std::string eval();
  std::string baselines();
  std::string report();
  std::vector<std::string> full_run();

 private:
  SampleSet load_omega(int stage) const;
  std::vector<Vector> load_attack(const std::string& method) const;
  void save_attack(const std::string& method, const std::vector<Vector>& samples, Origin origin);
  void evaluate_and_save(const std::string& method, const std::vector<Vector>& samples);
  int trained_stages() const;

  ExperimentConfig config_;
  EnvironmentPtr env_;
  RunStore store_;
  unsigned workers_;
};

}  // namespace bbgan
