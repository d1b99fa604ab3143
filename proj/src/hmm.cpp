#include "tactics/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "kernels.hpp"
#include "tactics/errors.hpp"

namespace tactics {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_distribution(const std::string& what, const auto& values) {
  double sum = 0.0;
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    const double p = values(k);
    if (!(p >= 0.0 && p <= 1.0)) {
      std::ostringstream msg;
      msg << what << " has entry " << p << " outside [0,1]";
      throw ValidationError(msg.str());
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kStochasticTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << " sums to " << sum << ", expected 1";
    throw ValidationError(msg.str());
  }
}

}  // namespace

ActionAlphabet::ActionAlphabet(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
  if (symbols_.empty()) throw ArgumentError("alphabet must contain at least one action");
  std::set<std::string> seen;
  for (const auto& s : symbols_) {
    if (s.empty()) throw ArgumentError("alphabet contains an empty action name");
    if (!seen.insert(s).second) throw ArgumentError("alphabet repeats action '" + s + "'");
  }
}

std::optional<std::size_t> ActionAlphabet::index_of(const std::string& name) const {
  const auto it = std::find(symbols_.begin(), symbols_.end(), name);
  if (it == symbols_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - symbols_.begin());
}

ActionAlphabet ActionAlphabet::search_actions() { return ActionAlphabet({"Q", "V", "S", "W", "T"}); }

EncodedCorpus::EncodedCorpus(ActionAlphabet alphabet, std::vector<Sequence> sequences)
    : alphabet_(std::move(alphabet)), sequences_(std::move(sequences)) {
  if (sequences_.empty()) throw ArgumentError("corpus must contain at least one sequence");
  const auto t = static_cast<int>(alphabet_.size());
  for (const auto& seq : sequences_) {
    if (seq.observations.empty()) {
      throw ArgumentError("sequence '" + seq.session_id + "' is empty");
    }
    for (const int o : seq.observations) {
      if (o < 0 || o >= t) {
        throw EncodingError("sequence '" + seq.session_id + "' has symbol index " +
                            std::to_string(o) + " outside alphabet of size " + std::to_string(t));
      }
    }
    total_events_ += seq.size();
  }
}

HmmModel::HmmModel(ActionAlphabet alphabet, Vector prior, Matrix transition, Matrix emission)
    : alphabet_(std::move(alphabet)),
      prior_(std::move(prior)),
      transition_(std::move(transition)),
      emission_(std::move(emission)) {
  const auto m = prior_.size();
  if (m < 1) throw ValidationError("model needs at least one hidden state");
  if (transition_.rows() != m || transition_.cols() != m) {
    throw ValidationError("transition matrix must be " + std::to_string(m) + "x" + std::to_string(m));
  }
  if (emission_.rows() != m || emission_.cols() != static_cast<Eigen::Index>(alphabet_.size())) {
    throw ValidationError("emission matrix must be " + std::to_string(m) + "x" +
                          std::to_string(alphabet_.size()));
  }
  check_distribution("prior", prior_);
  for (Eigen::Index i = 0; i < m; ++i) {
    check_distribution("transition row " + std::to_string(i), transition_.row(i));
    check_distribution("emission row " + std::to_string(i), emission_.row(i));
  }
}

bool operator==(const HmmModel& a, const HmmModel& b) {
  return a.alphabet_ == b.alphabet_ && a.prior_.size() == b.prior_.size() &&
         a.prior_ == b.prior_ && a.transition_ == b.transition_ && a.emission_ == b.emission_;
}

HmmModel permuted(const HmmModel& model, std::span<const int> perm) {
  const auto m = static_cast<Eigen::Index>(model.num_states());
  if (static_cast<Eigen::Index>(perm.size()) != m) {
    throw ArgumentError("permutation length does not match state count");
  }
  std::vector<int> sorted(perm.begin(), perm.end());
  std::sort(sorted.begin(), sorted.end());
  for (Eigen::Index i = 0; i < m; ++i) {
    if (sorted[i] != i) throw ArgumentError("not a permutation of the hidden states");
  }
  Vector prior(m);
  Matrix transition(m, m);
  Matrix emission(m, model.emission().cols());
  for (Eigen::Index i = 0; i < m; ++i) {
    prior(i) = model.prior()(perm[i]);
    emission.row(i) = model.emission().row(perm[i]);
    for (Eigen::Index j = 0; j < m; ++j) transition(i, j) = model.transition()(perm[i], perm[j]);
  }
  return HmmModel(model.alphabet(), std::move(prior), std::move(transition), std::move(emission));
}

void check_sequence(const HmmModel& model, const Sequence& seq) {
  if (seq.observations.empty()) throw ArgumentError("sequence '" + seq.session_id + "' is empty");
  const auto t = static_cast<int>(model.num_symbols());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const int o = seq.observations[i];
    if (o < 0 || o >= t) {
      throw EncodingError("sequence '" + seq.session_id + "' position " + std::to_string(i) +
                          ": symbol index " + std::to_string(o) + " outside alphabet of size " +
                          std::to_string(t));
    }
  }
}

Trellis forward(const HmmModel& model, const Sequence& seq) {
  check_sequence(model, seq);
  Trellis out;
  const Matrix emission_t = model.emission().transpose();
  const bool ok = detail::forward_pass(model.prior(), model.transition(), emission_t, seq.observations,
                                       out.scaled_forward, out.scales);
  if (!ok) {
    out.degenerate = true;
    out.log_likelihood = kNegInf;
    return out;
  }
  out.log_likelihood = detail::log_likelihood_from_scales(out.scales);
  return out;
}

Matrix backward(const HmmModel& model, const Sequence& seq, std::span<const double> scales) {
  check_sequence(model, seq);
  if (scales.size() != seq.size()) {
    throw ContractError("backward: " + std::to_string(scales.size()) + " scales for a sequence of length " +
                        std::to_string(seq.size()));
  }
  Matrix beta;
  detail::backward_pass(model.transition(), model.emission().transpose(), seq.observations, scales, beta);
  return beta;
}

Posteriors posteriors(const HmmModel& model, const Sequence& seq) {
  Trellis tr = forward(model, seq);
  if (tr.degenerate) {
    throw DegenerateError("sequence '" + seq.session_id + "' has probability zero under the model");
  }
  tr.scaled_backward = backward(model, seq, tr.scales);

  Posteriors post;
  post.log_likelihood = tr.log_likelihood;
  post.gamma = tr.scaled_forward.cwiseProduct(tr.scaled_backward);

  const auto n = static_cast<Eigen::Index>(seq.size());
  const Matrix& a = model.transition();
  const Matrix& b = model.emission();
  post.xi.reserve(seq.size() > 0 ? seq.size() - 1 : 0);
  for (Eigen::Index t = 0; t + 1 < n; ++t) {
    const int next = seq.observations[t + 1];
    Eigen::RowVectorXd weight =
        b.col(next).transpose().cwiseProduct(tr.scaled_backward.row(t + 1)) * tr.scales[t + 1];
    Matrix slice = (tr.scaled_forward.row(t).transpose() * weight).cwiseProduct(a);
    post.xi.push_back(std::move(slice));
  }
  return post;
}

double log_likelihood(const HmmModel& model, const EncodedCorpus& corpus) {
  double total = 0.0;
  for (const auto& seq : corpus.sequences()) {
    const Trellis tr = forward(model, seq);
    if (tr.degenerate) return kNegInf;
    total += tr.log_likelihood;
  }
  return total;
}

ViterbiPath viterbi(const HmmModel& model, const Sequence& seq) {
  check_sequence(model, seq);
  const auto n = static_cast<Eigen::Index>(seq.size());
  const auto m = static_cast<Eigen::Index>(model.num_states());
  const auto safe_log = [](double p) { return p > 0.0 ? std::log(p) : kNegInf; };
  const Matrix log_a = model.transition().unaryExpr(safe_log);
  const Matrix log_b = model.emission().unaryExpr(safe_log);

  Matrix delta(n, m);
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> back(n, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    delta(0, i) = safe_log(model.prior()(i)) + log_b(i, seq.observations[0]);
    back(0, i) = 0;
  }
  for (Eigen::Index t = 1; t < n; ++t) {
    const int o = seq.observations[t];
    for (Eigen::Index j = 0; j < m; ++j) {
      double best = kNegInf;
      int arg = 0;
      for (Eigen::Index i = 0; i < m; ++i) {
        const double v = delta(t - 1, i) + log_a(i, j);
        if (v > best) {
          best = v;
          arg = static_cast<int>(i);
        }
      }
      delta(t, j) = best + log_b(j, o);
      back(t, j) = arg;
    }
  }

  double best = kNegInf;
  int last = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (delta(n - 1, i) > best) {
      best = delta(n - 1, i);
      last = static_cast<int>(i);
    }
  }
  if (best == kNegInf) {
    throw DegenerateError("sequence '" + seq.session_id + "': every state path has probability zero");
  }

  ViterbiPath out;
  out.log_prob = best;
  out.states.resize(seq.size());
  out.states[n - 1] = last;
  for (Eigen::Index t = n - 1; t > 0; --t) out.states[t - 1] = back(t, out.states[t]);
  return out;
}

}  // namespace tactics
