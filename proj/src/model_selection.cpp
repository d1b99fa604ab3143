#include "tactics/model_selection.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "tactics/errors.hpp"

namespace tactics {

std::int64_t num_parameters(int num_states, int num_symbols) {
  if (num_states < 1) throw ArgumentError("num_parameters: M must be >= 1");
  if (num_symbols < 1) throw ArgumentError("num_parameters: T must be >= 1");
  const std::int64_t m = num_states;
  const std::int64_t t = num_symbols;
  return m * (m - 1) + m * (t - 1) + (m - 1);
}

double bic(double log_likelihood, std::int64_t sample_size, std::int64_t num_params) {
  if (sample_size < 1) throw ArgumentError("bic: sample size must be >= 1");
  if (num_params < 0) throw ArgumentError("bic: parameter count must be >= 0");
  return -2.0 * log_likelihood + std::log(static_cast<double>(sample_size)) * static_cast<double>(num_params);
}

std::int64_t sample_size(const EncodedCorpus& corpus, SampleSizeMode mode) {
  return mode == SampleSizeMode::kEvents ? static_cast<std::int64_t>(corpus.total_events())
                                         : static_cast<std::int64_t>(corpus.sequences().size());
}

std::size_t best_point(const std::vector<BicPoint>& points) {
  if (points.empty()) throw ArgumentError("no BIC points to choose from");
  std::size_t best = 0;
  for (std::size_t k = 1; k < points.size(); ++k) {
    const double cur = points[k].bic;
    const double incumbent = points[best].bic;
    const bool tied = std::isfinite(cur) && std::isfinite(incumbent) && std::abs(cur - incumbent) < kBicTieTolerance;
    const bool smaller_m = points[k].num_states < points[best].num_states;
    if (tied ? smaller_m : cur < incumbent) best = k;
  }
  return best;
}

BicCurve sweep(const EncodedCorpus& corpus, StateRange range, const TrainConfig& config, SampleSizeMode mode) {
  if (range.lo < 1) throw ArgumentError("state range must start at 1 or above");
  if (range.hi < range.lo) {
    throw ArgumentError("empty state range " + std::to_string(range.lo) + ".." + std::to_string(range.hi));
  }
  config.validate();

  const auto t = static_cast<int>(corpus.alphabet().size());
  const std::int64_t s = sample_size(corpus, mode);
  BicCurve curve;
  for (int m = range.lo; m <= range.hi; ++m) {
    TrainConfig per_m = config;
    per_m.seed = derive_seed(config.seed, static_cast<std::uint64_t>(m));
    const TrainResult fit = train(corpus, m, per_m);
    const std::int64_t np = num_parameters(m, t);
    const double value = std::isfinite(fit.log_likelihood) ? bic(fit.log_likelihood, s, np)
                                                           : std::numeric_limits<double>::infinity();
    curve.points.push_back(BicPoint{m, fit.log_likelihood, np, s, value, fit.iterations});
  }
  curve.best_num_states = curve.points[best_point(curve.points)].num_states;
  return curve;
}

void write_table(std::ostream& out, const BicCurve& curve) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << "M\tBIC\n" << std::fixed << std::setprecision(4);
  for (const auto& p : curve.points) out << p.num_states << '\t' << p.bic << '\n';
  out.flags(flags);
  out.precision(precision);
}

nlohmann::json to_json(const BicCurve& curve, SampleSizeMode mode) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : curve.points) {
    nlohmann::json row = {{"M", p.num_states},
                          {"log_likelihood", p.log_likelihood},
                          {"num_params", p.num_params},
                          {"sample_size", p.sample_size},
                          {"bic", p.bic},
                          {"iterations", p.iterations}};
    // JSON has no infinities; a degenerate fit is written as null.
    if (!std::isfinite(p.log_likelihood)) row["log_likelihood"] = nullptr;
    if (!std::isfinite(p.bic)) row["bic"] = nullptr;
    points.push_back(std::move(row));
  }
  return {{"sample_size_mode", mode == SampleSizeMode::kEvents ? "events" : "sequences"},
          {"points", std::move(points)},
          {"best_M", curve.best_num_states}};
}

}  // namespace tactics
