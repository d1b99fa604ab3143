#pragma once

// Discrete-observation hidden Markov model: value types plus scaled
// forward-backward inference and Viterbi decoding.

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tactics {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Tolerance used by every row-sum invariant on HmmModel.
inline constexpr double kStochasticTolerance = 1e-9;

/// Ordered set of action names. Index k in a Sequence refers to symbols()[k].
class ActionAlphabet {
 public:
  explicit ActionAlphabet(std::vector<std::string> symbols);

  const std::vector<std::string>& symbols() const { return symbols_; }
  std::size_t size() const { return symbols_.size(); }
  const std::string& operator[](std::size_t k) const { return symbols_[k]; }
  std::optional<std::size_t> index_of(const std::string& name) const;

  /// The five action types Query, View, Save, Workspace, Topic.
  static ActionAlphabet search_actions();

  friend bool operator==(const ActionAlphabet&, const ActionAlphabet&) = default;

 private:
  std::vector<std::string> symbols_;
};

struct Sequence {
  std::string session_id;
  std::vector<int> observations;

  std::size_t size() const { return observations.size(); }
};

/// A non-empty set of sessions encoded against one alphabet.
class EncodedCorpus {
 public:
  EncodedCorpus(ActionAlphabet alphabet, std::vector<Sequence> sequences);

  const ActionAlphabet& alphabet() const { return alphabet_; }
  const std::vector<Sequence>& sequences() const { return sequences_; }
  std::size_t total_events() const { return total_events_; }

 private:
  ActionAlphabet alphabet_;
  std::vector<Sequence> sequences_;
  std::size_t total_events_ = 0;
};

/// Prior, transition and emission parameters over a named alphabet.
/// Construction validates stochasticity and throws ValidationError.
class HmmModel {
 public:
  HmmModel(ActionAlphabet alphabet, Vector prior, Matrix transition, Matrix emission);

  std::size_t num_states() const { return static_cast<std::size_t>(prior_.size()); }
  std::size_t num_symbols() const { return alphabet_.size(); }
  const ActionAlphabet& alphabet() const { return alphabet_; }
  const Vector& prior() const { return prior_; }
  // transition(i, j) = P(next state j | state i)
  const Matrix& transition() const { return transition_; }
  // emission(i, k) = P(symbol k | state i)
  const Matrix& emission() const { return emission_; }

  friend bool operator==(const HmmModel& a, const HmmModel& b);

 private:
  ActionAlphabet alphabet_;
  Vector prior_;
  Matrix transition_;
  Matrix emission_;
};

/// Relabels hidden states: state i of the result is state perm[i] of `model`.
HmmModel permuted(const HmmModel& model, std::span<const int> perm);

/// Scaled forward/backward quantities for one sequence.
///
/// scales[t] is the reciprocal of the unscaled forward mass at step t, so
/// every scaled_forward row sums to one and
///   log_likelihood = -sum_t log(scales[t]).
/// When the sequence has probability zero the trellis is cut at the first
/// vanishing step, `degenerate` is set and log_likelihood is -infinity.
struct Trellis {
  Matrix scaled_forward;
  Matrix scaled_backward;
  std::vector<double> scales;
  double log_likelihood = 0.0;
  bool degenerate = false;
};

/// Throws EncodingError if any observation is outside the model alphabet.
void check_sequence(const HmmModel& model, const Sequence& seq);

Trellis forward(const HmmModel& model, const Sequence& seq);

/// Scaled backward values using the forward pass's scales. Row N-1 is all
/// ones; gamma_t = scaled_forward_t .* scaled_backward_t.
Matrix backward(const HmmModel& model, const Sequence& seq, std::span<const double> scales);

struct Posteriors {
  Matrix gamma;             // N x M
  std::vector<Matrix> xi;   // N-1 slices, each M x M
  double log_likelihood = 0.0;
};

/// Throws DegenerateError for a zero-probability sequence.
Posteriors posteriors(const HmmModel& model, const Sequence& seq);

/// Sum of forward log-likelihoods over all sequences (-inf if any is zero).
double log_likelihood(const HmmModel& model, const EncodedCorpus& corpus);

struct ViterbiPath {
  std::vector<int> states;
  double log_prob = 0.0;
};

/// Most probable state path. Ties resolve toward the lower state index.
/// Throws DegenerateError when every path has probability zero.
ViterbiPath viterbi(const HmmModel& model, const Sequence& seq);

}  // namespace tactics
