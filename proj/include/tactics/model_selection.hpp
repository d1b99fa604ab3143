#pragma once

// Free-parameter counting, BIC, and the sweep over candidate state counts.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "tactics/hmm.hpp"
#include "tactics/training.hpp"

namespace tactics {

/// M(M-1) transition + M(T-1) emission + (M-1) prior free parameters.
std::int64_t num_parameters(int num_states, int num_symbols);

/// -2 ln L + ln(S) NP. Natural log for both terms.
double bic(double log_likelihood, std::int64_t sample_size, std::int64_t num_params);

enum class SampleSizeMode { kEvents, kSequences };

std::int64_t sample_size(const EncodedCorpus& corpus, SampleSizeMode mode);

struct BicPoint {
  int num_states;
  double log_likelihood;
  std::int64_t num_params;
  std::int64_t sample_size;
  double bic;
  int iterations;
};

// BIC values closer than this count as tied; the smaller M wins.
inline constexpr double kBicTieTolerance = 1e-12;

struct BicCurve {
  std::vector<BicPoint> points;  // ascending num_states
  int best_num_states = 0;
};

/// Index into `points` of the minimum-BIC entry, smaller M on ties.
std::size_t best_point(const std::vector<BicPoint>& points);

struct StateRange {
  int lo;
  int hi;  // inclusive
};

/// Trains one model per M in `range`. Restart seeds for M derive from
/// (config.seed, M). A zero-likelihood fit records bic = +inf.
BicCurve sweep(const EncodedCorpus& corpus, StateRange range, const TrainConfig& config, SampleSizeMode mode);

/// Two-column "M<TAB>BIC" table with a header row.
void write_table(std::ostream& out, const BicCurve& curve);

nlohmann::json to_json(const BicCurve& curve, SampleSizeMode mode);

}  // namespace tactics
