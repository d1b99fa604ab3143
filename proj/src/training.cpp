#include "tactics/training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

#include "kernels.hpp"
#include "tactics/errors.hpp"

namespace tactics {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void normalize_rows(Matrix& counts, std::vector<int>& zero_rows) {
  for (Eigen::Index i = 0; i < counts.rows(); ++i) {
    const double total = counts.row(i).sum();
    if (total > 0.0 && std::isfinite(total)) {
      counts.row(i) /= total;
    } else {
      counts.row(i).setConstant(1.0 / static_cast<double>(counts.cols()));
      zero_rows.push_back(static_cast<int>(i));
    }
  }
}

Vector dirichlet_one(Eigen::Index n, Rng& rng) {
  Vector v(n);
  for (Eigen::Index k = 0; k < n; ++k) v(k) = -std::log1p(-uniform01(rng));
  return v / v.sum();
}

}  // namespace

void TrainConfig::validate() const {
  if (restarts < 1) throw ArgumentError("restarts must be >= 1");
  if (max_iters < 1) throw ArgumentError("max_iters must be >= 1");
  if (!(tol > 0.0)) throw ArgumentError("tol must be > 0");
}

namespace {

struct ExpectedCounts {
  Vector prior;
  Matrix pairs;    // sum_t alpha_t (x) w_{t+1}; times transition gives xi sums
  Matrix symbols_t;  // T x M: sum of gamma_t over positions emitting each symbol
  double log_likelihood = 0.0;
  int floored = 0;
};

template <int K>
void accumulate(const HmmModel& model, const EncodedCorpus& corpus, ExpectedCounts& out) {
  const Eigen::Index m = K > 0 ? K : static_cast<Eigen::Index>(model.num_states());
  const Matrix& transition = model.transition();
  const Matrix emission_t = model.emission().transpose();
  std::optional<Matrix> floored_t;

  Matrix alpha;
  Matrix beta;
  Matrix weights;
  std::vector<double> scales;
  double* __restrict symbols_t = out.symbols_t.data();
  for (const auto& seq : corpus.sequences()) {
    const std::span<const int> obs(seq.observations);
    const Matrix* emit = &emission_t;
    if (!detail::forward_pass<K>(model.prior(), transition, emission_t, obs, alpha, scales)) {
      out.log_likelihood = kNegInf;
      ++out.floored;
      if (!floored_t) floored_t = emission_t.cwiseMax(kEmissionFloor);
      emit = &*floored_t;
      detail::forward_pass<K>(model.prior(), transition, *emit, obs, alpha, scales);
    } else if (out.log_likelihood != kNegInf) {
      out.log_likelihood += detail::log_likelihood_from_scales(scales);
    }
    const auto n = alpha.rows();
    weights.resize(n, m);
    double* __restrict weight_data = weights.data();
    detail::backward_pass<K>(transition, *emit, obs, scales, beta, [&](Eigen::Index t, const double* __restrict w) {
      double* __restrict row = weight_data + t * m;
      for (Eigen::Index j = 0; j < m; ++j) row[j] = w[j];
    });
    if (n > 1) out.pairs.noalias() += alpha.topRows(n - 1).transpose() * weights.topRows(n - 1);

    const double* __restrict alpha_data = alpha.data();
    const double* __restrict beta_data = beta.data();
    for (Eigen::Index i = 0; i < m; ++i) out.prior(i) += alpha_data[i] * beta_data[i];
    for (Eigen::Index t = 0; t < n; ++t) {
      const double* __restrict at = alpha_data + t * m;
      const double* __restrict bt = beta_data + t * m;
      double* __restrict counts = symbols_t + obs[t] * m;
      for (Eigen::Index i = 0; i < m; ++i) counts[i] += at[i] * bt[i];
    }
  }
}

}  // namespace

BaumWelchStep baum_welch_step(const HmmModel& model, const EncodedCorpus& corpus) {
  if (!(corpus.alphabet() == model.alphabet())) {
    throw ArgumentError("corpus alphabet does not match model alphabet");
  }
  const auto m = static_cast<Eigen::Index>(model.num_states());
  ExpectedCounts counts{Vector::Zero(m), Matrix::Zero(m, m),
                        Matrix::Zero(static_cast<Eigen::Index>(model.num_symbols()), m), 0.0, 0};
  detail::dispatch_states(m, [&]<int K>() { accumulate<K>(model, corpus, counts); });

  std::vector<int> reinit;
  Matrix new_transition = counts.pairs.cwiseProduct(model.transition());
  normalize_rows(new_transition, reinit);
  Matrix new_emission = counts.symbols_t.transpose();
  normalize_rows(new_emission, reinit);
  std::sort(reinit.begin(), reinit.end());
  reinit.erase(std::unique(reinit.begin(), reinit.end()), reinit.end());
  Vector new_prior = counts.prior / counts.prior.sum();

  return BaumWelchStep{
      HmmModel(model.alphabet(), std::move(new_prior), std::move(new_transition), std::move(new_emission)),
      counts.log_likelihood, std::move(reinit), counts.floored};
}

EmRun fit_from(HmmModel start, const EncodedCorpus& corpus, int max_iters, double tol) {
  if (max_iters < 1) throw ArgumentError("max_iters must be >= 1");
  if (!(tol > 0.0)) throw ArgumentError("tol must be > 0");

  HmmModel model = std::move(start);
  std::vector<double> history;
  std::vector<std::string> warnings;
  int iterations = 0;
  bool converged = false;
  while (iterations < max_iters) {
    BaumWelchStep step = baum_welch_step(model, corpus);
    history.push_back(step.log_likelihood);
    const auto k = history.size();
    if (k >= 2 && std::isfinite(history[k - 1]) && std::isfinite(history[k - 2]) &&
        history[k - 1] - history[k - 2] < tol) {
      converged = true;
      break;
    }
    for (const int s : step.reinitialized_states) {
      warnings.push_back("iteration " + std::to_string(iterations + 1) + ": state " + std::to_string(s) +
                         " had zero expected occupancy and was reset to uniform");
    }
    if (step.floored_sequences > 0) {
      warnings.push_back("iteration " + std::to_string(iterations + 1) + ": " +
                         std::to_string(step.floored_sequences) +
                         " zero-probability sequence(s) used floored emissions");
    }
    model = std::move(step.model);
    ++iterations;
  }
  double ll = history.back();
  if (!converged) {
    ll = log_likelihood(model, corpus);
    history.push_back(ll);
  }
  return EmRun{std::move(model), ll, iterations, std::move(history), std::move(warnings)};
}

HmmModel random_model(const ActionAlphabet& alphabet, int num_states, Rng& rng) {
  if (num_states < 1) throw ArgumentError("number of hidden states must be >= 1");
  const Eigen::Index m = num_states;
  const auto t = static_cast<Eigen::Index>(alphabet.size());
  Vector prior = dirichlet_one(m, rng);
  Matrix transition(m, m);
  for (Eigen::Index i = 0; i < m; ++i) transition.row(i) = dirichlet_one(m, rng).transpose();
  Matrix emission(m, t);
  for (Eigen::Index i = 0; i < m; ++i) emission.row(i) = dirichlet_one(t, rng).transpose();
  return HmmModel(alphabet, std::move(prior), std::move(transition), std::move(emission));
}

TrainResult train(const EncodedCorpus& corpus, int num_states, const TrainConfig& config) {
  if (num_states < 1) throw ArgumentError("number of hidden states must be >= 1");
  config.validate();

  const auto restarts = static_cast<std::size_t>(config.restarts);
  std::vector<std::optional<EmRun>> runs(restarts);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto worker = [&] {
    for (std::size_t r = next++; r < restarts; r = next++) {
      try {
        Rng rng(derive_seed(config.seed, r));
        HmmModel start = random_model(corpus.alphabet(), num_states, rng);
        runs[r] = fit_from(std::move(start), corpus, config.max_iters, config.tol);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  unsigned workers = config.threads != 0 ? config.threads : std::thread::hardware_concurrency();
  workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(restarts));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::size_t best = 0;
  std::vector<double> finals;
  for (std::size_t r = 0; r < restarts; ++r) {
    finals.push_back(runs[r]->log_likelihood);
    if (runs[r]->log_likelihood > runs[best]->log_likelihood) best = r;
  }
  EmRun& winner = *runs[best];
  return TrainResult{std::move(winner.model), winner.log_likelihood, winner.iterations, static_cast<int>(best),
                     std::move(finals), std::move(winner.warnings)};
}

}  // namespace tactics
