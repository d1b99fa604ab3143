#pragma once

// Baum-Welch re-estimation over a pooled multi-sequence corpus, and the
// restart driver that picks the best of several seeded EM runs.

#include <cstdint>
#include <string>
#include <vector>

#include "tactics/hmm.hpp"
#include "tactics/rng.hpp"

namespace tactics {

struct TrainConfig {
  int restarts = 10;
  int max_iters = 500;
  double tol = 1e-6;  // stop once the log-likelihood gain drops below this
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: one worker per hardware thread

  void validate() const;
};

// Emission floor used in the E-step for sequences the current model gives
// probability zero.
inline constexpr double kEmissionFloor = 1e-12;

struct BaumWelchStep {
  HmmModel model;
  double log_likelihood;                  // total, under the input model
  std::vector<int> reinitialized_states;  // zero expected occupancy
  int floored_sequences = 0;
};

/// One EM iteration. Expected counts are pooled over every sequence; the
/// prior is the mean of the first-position posteriors.
BaumWelchStep baum_welch_step(const HmmModel& model, const EncodedCorpus& corpus);

struct EmRun {
  HmmModel model;
  double log_likelihood;
  int iterations;                 // M-steps applied to reach `model`
  std::vector<double> history;    // log-likelihood of each visited model
  std::vector<std::string> warnings;
};

/// Runs EM from `start` until the gain is below tol or max_iters is hit.
EmRun fit_from(HmmModel start, const EncodedCorpus& corpus, int max_iters, double tol);

/// Random model with every distribution drawn from a symmetric Dirichlet(1).
HmmModel random_model(const ActionAlphabet& alphabet, int num_states, Rng& rng);

struct TrainResult {
  HmmModel model;
  double log_likelihood;
  int iterations;
  int best_restart;
  std::vector<double> restart_log_likelihoods;
  std::vector<std::string> warnings;
};

/// `config.restarts` independent EM runs from seeded random starts; the
/// run with the highest final log-likelihood wins (lowest restart index on
/// ties). Results do not depend on thread count.
TrainResult train(const EncodedCorpus& corpus, int num_states, const TrainConfig& config);

}  // namespace tactics
