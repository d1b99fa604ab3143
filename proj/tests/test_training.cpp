#include <cmath>

#include "doctest.h"
#include "tactics/errors.hpp"
#include "tactics/simulator.hpp"
#include "tactics/tactic_report.hpp"
#include "tactics/training.hpp"
#include "test_support.hpp"

using namespace tactics;
using testing::make_model;

namespace {

void check_stochastic(const HmmModel& model) {
  CHECK(std::abs(model.prior().sum() - 1.0) < 1e-9);
  CHECK(model.prior().minCoeff() >= 0.0);
  for (Eigen::Index i = 0; i < model.transition().rows(); ++i) {
    CHECK(std::abs(model.transition().row(i).sum() - 1.0) < 1e-9);
    CHECK(std::abs(model.emission().row(i).sum() - 1.0) < 1e-9);
  }
  CHECK(model.transition().minCoeff() >= 0.0);
  CHECK(model.transition().maxCoeff() <= 1.0);
  CHECK(model.emission().minCoeff() >= 0.0);
  CHECK(model.emission().maxCoeff() <= 1.0);
}

EncodedCorpus random_corpus(int t, int count, int length, std::uint64_t seed) {
  std::vector<Sequence> seqs;
  for (int k = 0; k < count; ++k) seqs.push_back(testing::random_sequence(length, t, seed * 100 + k));
  return EncodedCorpus(testing::letters(t), std::move(seqs));
}

}  // namespace

TEST_CASE("config validation") {
  TrainConfig config;
  CHECK_NOTHROW(config.validate());
  config.restarts = 0;
  CHECK_THROWS_AS(config.validate(), ArgumentError);
  config = {};
  config.max_iters = 0;
  CHECK_THROWS_AS(config.validate(), ArgumentError);
  config = {};
  config.tol = 0.0;
  CHECK_THROWS_AS(config.validate(), ArgumentError);
}

TEST_CASE("the true deterministic model is an EM fixpoint") {
  const auto model = testing::alternating_model();
  const EncodedCorpus corpus(model.alphabet(), {Sequence{"a", {0, 1, 0, 1}}, Sequence{"b", {0, 1, 0}}});
  const BaumWelchStep step = baum_welch_step(model, corpus);
  CHECK((step.model.prior() - model.prior()).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((step.model.transition() - model.transition()).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((step.model.emission() - model.emission()).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(step.log_likelihood == doctest::Approx(0.0));
}

TEST_CASE("step reports the input model's likelihood") {
  const auto model = testing::random_model(3, 4, 8);
  const auto corpus = random_corpus(4, 5, 20, 3);
  CHECK(baum_welch_step(model, corpus).log_likelihood == doctest::Approx(log_likelihood(model, corpus)).epsilon(1e-12));
}

TEST_CASE("property: EM steps keep models stochastic and never lower the likelihood") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const int m = 1 + static_cast<int>(seed % 5);
    const int t = 2 + static_cast<int>(seed % 4);
    auto model = testing::random_model(m, t, seed);
    const auto corpus = random_corpus(t, 1 + static_cast<int>(seed % 4), 5 + static_cast<int>(seed * 7 % 40), seed);
    double previous = log_likelihood(model, corpus);
    for (int it = 0; it < 25; ++it) {
      model = baum_welch_step(model, corpus).model;
      check_stochastic(model);
      const double now = log_likelihood(model, corpus);
      CHECK(now >= previous - 1e-8);
      previous = now;
    }
  }
}

TEST_CASE("fit_from history is non-decreasing and stops on tol") {
  const auto corpus = random_corpus(3, 4, 30, 9);
  const EmRun run = fit_from(testing::random_model(3, 3, 4), corpus, 500, 1e-6);
  for (std::size_t k = 1; k < run.history.size(); ++k) CHECK(run.history[k] >= run.history[k - 1] - 1e-8);
  CHECK(run.log_likelihood == doctest::Approx(log_likelihood(run.model, corpus)).epsilon(1e-12));
  CHECK(run.iterations <= 500);
}

TEST_CASE("fit_from returns the final likelihood when the cap is reached") {
  const auto corpus = random_corpus(3, 4, 30, 9);
  const EmRun run = fit_from(testing::random_model(3, 3, 4), corpus, 2, 1e-300);
  CHECK(run.iterations == 2);
  CHECK(run.log_likelihood == log_likelihood(run.model, corpus));
}

TEST_CASE("zero-occupancy states are reset to uniform with a warning") {
  // State 1 is unreachable: prior and all transitions lead to state 0.
  const auto model = make_model({"a", "b"}, {1, 0}, {{1, 0}, {1, 0}}, {{0.5, 0.5}, {0.5, 0.5}});
  const EncodedCorpus corpus(model.alphabet(), {Sequence{"s", {0, 1, 1}}});
  const BaumWelchStep step = baum_welch_step(model, corpus);
  CHECK(step.reinitialized_states == std::vector<int>{1});
  CHECK(step.model.emission()(1, 0) == 0.5);
  CHECK(step.model.transition()(1, 1) == 0.5);
  CHECK_FALSE(std::isnan(step.model.emission().sum()));

  const EmRun run = fit_from(model, corpus, 3, 1e-6);
  CHECK_FALSE(run.warnings.empty());
}

TEST_CASE("zero-probability sequences use floored emissions and yield a valid model") {
  const auto model = testing::alternating_model();
  const EncodedCorpus corpus(model.alphabet(), {Sequence{"s", {0, 0, 1}}});
  const BaumWelchStep step = baum_welch_step(model, corpus);
  CHECK(step.floored_sequences == 1);
  CHECK(step.log_likelihood == -std::numeric_limits<double>::infinity());
  check_stochastic(step.model);
}

TEST_CASE("alphabet mismatch is rejected") {
  const auto model = testing::random_model(2, 3, 1);
  const auto corpus = random_corpus(2, 1, 4, 1);
  CHECK_THROWS_AS(baum_welch_step(model, corpus), ArgumentError);
}

TEST_CASE("single-state training gives empirical frequencies") {
  const EncodedCorpus corpus(testing::letters(3), {Sequence{"a", {0, 1, 1, 2}}, Sequence{"b", {1, 1}}});
  const TrainResult result = train(corpus, 1, TrainConfig{});
  CHECK(result.model.prior()(0) == doctest::Approx(1.0));
  CHECK(result.model.transition()(0, 0) == doctest::Approx(1.0));
  CHECK(result.model.emission()(0, 0) == doctest::Approx(1.0 / 6));
  CHECK(result.model.emission()(0, 1) == doctest::Approx(4.0 / 6));
  CHECK(result.model.emission()(0, 2) == doctest::Approx(1.0 / 6));
}

TEST_CASE("training is bit-reproducible for a seed, regardless of threads") {
  const auto corpus = random_corpus(4, 6, 40, 17);
  TrainConfig config;
  config.restarts = 4;
  config.max_iters = 60;
  config.seed = 123;
  config.threads = 1;
  const TrainResult a = train(corpus, 3, config);
  config.threads = 4;
  const TrainResult b = train(corpus, 3, config);
  CHECK(a.model == b.model);
  CHECK(a.log_likelihood == b.log_likelihood);
  CHECK(a.best_restart == b.best_restart);
  CHECK(a.restart_log_likelihoods == b.restart_log_likelihoods);
  for (const double ll : a.restart_log_likelihoods) CHECK(ll <= a.log_likelihood);

  config.seed = 124;
  CHECK_FALSE(train(corpus, 3, config).model == a.model);
}

TEST_CASE("invalid state counts are rejected") {
  const auto corpus = random_corpus(2, 1, 4, 1);
  CHECK_THROWS_AS(train(corpus, 0, TrainConfig{}), ArgumentError);
  Rng rng(1);
  CHECK_THROWS_AS(random_model(testing::letters(2), 0, rng), ArgumentError);
}

TEST_CASE("planted 2-state model is recovered after 100 steps") {
  const auto planted = make_model({"a", "b", "c"}, {0.7, 0.3}, {{0.85, 0.15}, {0.2, 0.8}},
                                  {{0.8, 0.15, 0.05}, {0.1, 0.2, 0.7}});
  const SampledCorpus sampled = sample(PlantedSpec{planted, 50, FixedLength{50}, 2024});
  const auto start = make_model({"a", "b", "c"}, {0.6, 0.4}, {{0.7, 0.3}, {0.3, 0.7}},
                                {{0.5, 0.3, 0.2}, {0.2, 0.3, 0.5}});
  HmmModel model = start;
  for (int it = 0; it < 100; ++it) model = baum_welch_step(model, sampled.corpus).model;
  const Alignment al = align(planted, model);
  const HmmModel fitted = permuted(model, al.permutation);
  CHECK((fitted.emission() - planted.emission()).cwiseAbs().maxCoeff() < 0.05);
  CHECK((fitted.transition() - planted.transition()).cwiseAbs().maxCoeff() < 0.05);
}
