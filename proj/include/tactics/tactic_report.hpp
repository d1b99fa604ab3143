#pragma once

// Turns a trained model into readable artifacts: pruned emission tables,
// transition heatmaps, the dominant tactic path, per-tactic labels, and
// label-switching alignment between two models.

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tactics/hmm.hpp"

namespace tactics {

inline constexpr double kDefaultPruneThreshold = 0.05;

using PrunedRow = std::vector<std::pair<std::string, double>>;

/// Per tactic, the (action, p) pairs with p >= threshold, highest first.
/// Probabilities are copied as-is, never renormalized.
std::vector<PrunedRow> prune_emissions(const HmmModel& model, double threshold);

enum class HeatmapFormat { kSvg, kText };

/// Gray level for a cell: round-half-up of 255 * (1 - p).
int heatmap_luminance(double p);

/// Rows are source tactics, columns destinations. Throws ValidationError
/// if a row is off stochastic by more than 1e-6.
void render_heatmap(const Matrix& transition, std::ostream& out, HeatmapFormat format);

/// Greedy walk: argmax prior, then argmax transition, stopping before the
/// first repeated tactic. Lower index wins ties.
std::vector<int> dominant_path(const HmmModel& model);

inline constexpr const char* kDiffuseLabel = "(diffuse)";

/// Retained actions joined with '+', e.g. "W+T".
std::vector<std::string> label_tactics(const HmmModel& model, double threshold);

/// "S<i+1>"
std::string tactic_name(int index);

struct Alignment {
  std::vector<int> permutation;  // permuted(model_b, permutation) lines up with model_a
  double residual;               // emission L1 distance after permuting
  double transition_distance;    // transition L1, reported only
};

inline constexpr std::size_t kMaxAlignStates = 8;

/// Exhaustive search over state permutations of model_b.
Alignment align(const HmmModel& model_a, const HmmModel& model_b);

struct TacticReport {
  double threshold;
  std::vector<PrunedRow> pruned_emissions;
  Matrix transition;
  std::vector<int> dominant_path;
  std::vector<std::string> labels;
};

TacticReport build_report(const HmmModel& model, double threshold);

/// "S5 -> S1 -> S2"
std::string format_path(const std::vector<int>& path);

nlohmann::json to_json(const TacticReport& report);
void write_text(std::ostream& out, const TacticReport& report);

}  // namespace tactics
