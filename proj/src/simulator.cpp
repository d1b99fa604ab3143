#include "tactics/simulator.hpp"

#include <string>

#include "tactics/errors.hpp"
#include "tactics/rng.hpp"

namespace tactics {

namespace {

// Inverse-CDF draw; rounding shortfall lands on the last positive entry.
int draw(const auto& probs, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  int last_positive = 0;
  for (Eigen::Index k = 0; k < probs.size(); ++k) {
    if (probs(k) <= 0.0) continue;
    last_positive = static_cast<int>(k);
    acc += probs(k);
    if (u < acc) return static_cast<int>(k);
  }
  return last_positive;
}

std::string session_name(int index, int count) {
  std::string digits = std::to_string(index + 1);
  const auto width = std::to_string(count).size();
  return "s" + std::string(width - digits.size(), '0') + digits;
}

// Spreads 1 - sum(listed) evenly over the unlisted symbols of one row.
void fill_row(Matrix& emission, Eigen::Index row, std::initializer_list<std::pair<int, double>> listed) {
  const auto t = emission.cols();
  double mass = 0.0;
  std::vector<bool> set(static_cast<std::size_t>(t), false);
  for (const auto& [k, p] : listed) {
    emission(row, k) = p;
    set[static_cast<std::size_t>(k)] = true;
    mass += p;
  }
  const double rest = (1.0 - mass) / static_cast<double>(t - static_cast<Eigen::Index>(listed.size()));
  for (Eigen::Index k = 0; k < t; ++k) {
    if (!set[static_cast<std::size_t>(k)]) emission(row, k) = rest;
  }
}

}  // namespace

void PlantedSpec::validate() const {
  if (n_sequences < 1) throw ArgumentError("n_sequences must be >= 1");
  if (const auto* fixed = std::get_if<FixedLength>(&lengths)) {
    if (fixed->length < 1) throw ArgumentError("sequence length must be >= 1");
  } else {
    const auto& range = std::get<UniformLength>(lengths);
    if (range.min < 1 || range.max < range.min) {
      throw ArgumentError("length range must satisfy 1 <= min <= max");
    }
  }
}

SampledCorpus sample(const PlantedSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const HmmModel& model = spec.model;

  std::vector<Sequence> sequences;
  std::vector<std::vector<int>> paths;
  sequences.reserve(static_cast<std::size_t>(spec.n_sequences));
  paths.reserve(static_cast<std::size_t>(spec.n_sequences));
  for (int s = 0; s < spec.n_sequences; ++s) {
    int length = 0;
    if (const auto* fixed = std::get_if<FixedLength>(&spec.lengths)) {
      length = fixed->length;
    } else {
      const auto& range = std::get<UniformLength>(spec.lengths);
      const auto span = static_cast<double>(range.max - range.min + 1);
      length = range.min + std::min(static_cast<int>(uniform01(rng) * span), range.max - range.min);
    }

    Sequence seq{session_name(s, spec.n_sequences), {}};
    std::vector<int> path;
    seq.observations.reserve(static_cast<std::size_t>(length));
    path.reserve(static_cast<std::size_t>(length));
    int state = draw(model.prior(), rng);
    for (int t = 0; t < length; ++t) {
      if (t > 0) state = draw(model.transition().row(state), rng);
      path.push_back(state);
      seq.observations.push_back(draw(model.emission().row(state), rng));
    }
    sequences.push_back(std::move(seq));
    paths.push_back(std::move(path));
  }
  return SampledCorpus{EncodedCorpus(model.alphabet(), std::move(sequences)), std::move(paths)};
}

HmmModel paper_planted_model() {
  enum : int { Q, V, S, W, T };
  Matrix emission = Matrix::Zero(5, 5);
  fill_row(emission, 0, {{Q, 0.92}, {T, 0.06}});
  fill_row(emission, 1, {{V, 0.97}});
  fill_row(emission, 2, {{V, 0.98}});
  fill_row(emission, 3, {{W, 0.97}});
  fill_row(emission, 4, {{W, 0.67}, {T, 0.32}});

  Vector prior(5);
  prior << 0.20, 0.05, 0.05, 0.05, 0.65;

  // S4 is entered from S3 and S5 mostly from S1, so the two W-heavy
  // tactics are told apart by what precedes them.
  Matrix transition(5, 5);
  // clang-format off
  transition << 0.08, 0.55, 0.02, 0.02, 0.33,   // S1 -> S2, else back to S5
                0.05, 0.10, 0.80, 0.03, 0.02,   // S2 -> S3
                0.05, 0.02, 0.10, 0.80, 0.03,   // S3 -> S4
                0.42, 0.02, 0.02, 0.52, 0.02,   // S4 mostly stays
                0.49, 0.01, 0.01, 0.01, 0.48;   // S5 -> S1
  // clang-format on
  return HmmModel(ActionAlphabet::search_actions(), std::move(prior), std::move(transition), std::move(emission));
}

}  // namespace tactics
