#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bbgan/envs.hpp"
#include "bbgan/gmm.hpp"
#include "bbgan/gp.hpp"
#include "bbgan/inducer.hpp"
#include "bbgan/svm.hpp"

namespace bbgan {

// M uniform points in [-1,1]^d.
std::vector<Vector> random_attack(std::size_t dims, std::size_t count, SeededSampler& rng);

// GMM with round(fraction * |S|) components (at least one) fitted on the
// induced set, then sampled.
std::vector<Vector> gmm_attack(const InducedSet& induced, double fraction, std::size_t count, SeededSampler& rng);

// Candidate pool size for the ranking baselines: 50 M, never below M.
std::size_t candidate_pool_size(std::size_t count);

// Ranks fresh uniform candidates by predicted bin (ties: larger margin
// first) and returns the lowest M.
std::vector<Vector> svm_rank_attack(const SampleSet& omega, std::size_t count, SeededSampler& rng,
                                    const SvmOptions& options);
std::vector<Vector> svm_rank_attack(const SampleSet& omega, std::size_t count, SeededSampler& rng);

// As svm_rank_attack, ranking by GP posterior mean. At most max_train
// points of omega (a seeded subset) are used for the fit.
std::vector<Vector> gp_rank_attack(const SampleSet& omega, std::size_t count, SeededSampler& rng,
                                   const GpOptions& options, std::size_t max_train = 1000);
std::vector<Vector> gp_rank_attack(const SampleSet& omega, std::size_t count, SeededSampler& rng);

struct BayesOptions {
  std::size_t steps = 2000;
  std::size_t tail = 1000;     // evaluations kept for the GMM fit
  std::size_t window = 500;    // most recent points the GP is refit on
  std::size_t pool = 1024;     // uniform EI candidates per step
  std::size_t initial = 10;    // uniform warm-up evaluations, counted in steps
  double xi = 0.01;
  std::vector<std::size_t> components{1, 10, 50};
  std::size_t attack_samples = 100;
  unsigned workers = 1;
};

struct BayesResult {
  GmmModel model;
  std::size_t components = 0;
  double afr = 0.0;                      // of the chosen model on its selection draw
  std::vector<ScoredSample> history;     // every evaluation, in order
};

// Expected-improvement search with a sliding-window GP surrogate, followed
// by GMM fits on the tail of the history; returns the best-AFR fit.
BayesResult bayesian_attack(const Environment& env, const BayesOptions& options, SeededSampler& rng);

}  // namespace bbgan
