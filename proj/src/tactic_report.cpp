#include "tactics/tactic_report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "tactics/errors.hpp"

namespace tactics {

namespace {

constexpr int kCell = 48;
constexpr int kMargin = 40;

void check_threshold(double threshold) {
  if (!(threshold >= 0.0 && threshold < 1.0)) throw ArgumentError("threshold must lie in [0, 1)");
}

int argmax(const auto& values) {
  int best = 0;
  for (Eigen::Index k = 1; k < values.size(); ++k) {
    if (values(k) > values(best)) best = static_cast<int>(k);
  }
  return best;
}

}  // namespace

std::vector<PrunedRow> prune_emissions(const HmmModel& model, double threshold) {
  check_threshold(threshold);
  std::vector<PrunedRow> table;
  const Matrix& e = model.emission();
  for (Eigen::Index i = 0; i < e.rows(); ++i) {
    PrunedRow row;
    for (Eigen::Index k = 0; k < e.cols(); ++k) {
      if (e(i, k) >= threshold) row.emplace_back(model.alphabet()[static_cast<std::size_t>(k)], e(i, k));
    }
    std::stable_sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    table.push_back(std::move(row));
  }
  return table;
}

int heatmap_luminance(double p) {
  const double clamped = std::clamp(p, 0.0, 1.0);
  return static_cast<int>(std::floor(255.0 * (1.0 - clamped) + 0.5));
}

void render_heatmap(const Matrix& transition, std::ostream& out, HeatmapFormat format) {
  const auto m = transition.rows();
  if (m < 1 || transition.cols() != m) throw ValidationError("transition matrix must be square and non-empty");
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sum = transition.row(i).sum();
    const bool in_range = (transition.row(i).array() >= 0.0).all() && (transition.row(i).array() <= 1.0).all();
    if (!in_range || std::abs(sum - 1.0) > 1e-6) {
      throw ValidationError("transition row " + std::to_string(i) + " is not a probability distribution");
    }
  }

  if (format == HeatmapFormat::kText) {
    out << "from\\to";
    for (Eigen::Index j = 0; j < m; ++j) out << '\t' << tactic_name(static_cast<int>(j));
    out << '\n' << std::fixed << std::setprecision(3);
    for (Eigen::Index i = 0; i < m; ++i) {
      out << tactic_name(static_cast<int>(i));
      for (Eigen::Index j = 0; j < m; ++j) out << '\t' << transition(i, j);
      out << '\n';
    }
    out << std::defaultfloat;
    return;
  }

  const auto size = kMargin + static_cast<int>(m) * kCell;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
      << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n";
  out << "<g font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">\n";
  for (Eigen::Index k = 0; k < m; ++k) {
    const int centre = kMargin + static_cast<int>(k) * kCell + kCell / 2;
    out << "<text x=\"" << centre << "\" y=\"" << kMargin / 2 + 5 << "\">" << tactic_name(static_cast<int>(k))
        << "</text>\n";
    out << "<text x=\"" << kMargin / 2 << "\" y=\"" << centre + 5 << "\">" << tactic_name(static_cast<int>(k))
        << "</text>\n";
  }
  out << "</g>\n";
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const int l = heatmap_luminance(transition(i, j));
      std::ostringstream prob;
      prob << std::fixed << std::setprecision(3) << transition(i, j);
      out << "<rect x=\"" << kMargin + static_cast<int>(j) * kCell << "\" y=\"" << kMargin + static_cast<int>(i) * kCell
          << "\" width=\"" << kCell << "\" height=\"" << kCell << "\" fill=\"rgb(" << l << ',' << l << ',' << l
          << ")\" stroke=\"#999999\"><title>" << tactic_name(static_cast<int>(i)) << " -> "
          << tactic_name(static_cast<int>(j)) << ": " << prob.str() << "</title></rect>\n";
    }
  }
  out << "</svg>\n";
}

std::vector<int> dominant_path(const HmmModel& model) {
  std::vector<int> path;
  std::vector<bool> seen(model.num_states(), false);
  int current = argmax(model.prior());
  while (!seen[static_cast<std::size_t>(current)]) {
    seen[static_cast<std::size_t>(current)] = true;
    path.push_back(current);
    current = argmax(model.transition().row(current));
  }
  return path;
}

std::vector<std::string> label_tactics(const HmmModel& model, double threshold) {
  std::vector<std::string> labels;
  for (const auto& row : prune_emissions(model, threshold)) {
    if (row.empty()) {
      labels.emplace_back(kDiffuseLabel);
      continue;
    }
    std::string label;
    for (const auto& [action, p] : row) label += (label.empty() ? "" : "+") + action;
    labels.push_back(std::move(label));
  }
  return labels;
}

std::string tactic_name(int index) { return "S" + std::to_string(index + 1); }

Alignment align(const HmmModel& model_a, const HmmModel& model_b) {
  if (!(model_a.alphabet() == model_b.alphabet())) throw ArgumentError("align: models use different alphabets");
  if (model_a.num_states() != model_b.num_states()) throw ArgumentError("align: models differ in state count");
  const std::size_t m = model_a.num_states();
  if (m > kMaxAlignStates) {
    throw SizeError("align: " + std::to_string(m) + " states exceeds the exhaustive limit of " +
                    std::to_string(kMaxAlignStates));
  }

  // cost(i, j): L1 between emission row i of a and row j of b.
  const Matrix& ea = model_a.emission();
  const Matrix& eb = model_b.emission();
  Matrix cost(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < cost.rows(); ++i) {
    for (Eigen::Index j = 0; j < cost.cols(); ++j) cost(i, j) = (ea.row(i) - eb.row(j)).cwiseAbs().sum();
  }

  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < m; ++i) c += cost(static_cast<Eigen::Index>(i), perm[i]);
    if (c < best_cost) {
      best_cost = c;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  const HmmModel aligned = permuted(model_b, best);
  const double transition_distance = (model_a.transition() - aligned.transition()).cwiseAbs().sum();
  return Alignment{std::move(best), best_cost, transition_distance};
}

TacticReport build_report(const HmmModel& model, double threshold) {
  return TacticReport{threshold, prune_emissions(model, threshold), model.transition(), dominant_path(model),
                      label_tactics(model, threshold)};
}

std::string format_path(const std::vector<int>& path) {
  std::string out;
  for (const int s : path) out += (out.empty() ? "" : " -> ") + tactic_name(s);
  return out;
}

nlohmann::json to_json(const TacticReport& report) {
  nlohmann::json tactics = nlohmann::json::array();
  for (std::size_t i = 0; i < report.pruned_emissions.size(); ++i) {
    nlohmann::json emissions = nlohmann::json::array();
    for (const auto& [action, p] : report.pruned_emissions[i]) emissions.push_back({{"action", action}, {"p", p}});
    tactics.push_back({{"tactic", tactic_name(static_cast<int>(i))},
                       {"label", report.labels[i]},
                       {"emissions", std::move(emissions)}});
  }
  nlohmann::json transition = nlohmann::json::array();
  for (Eigen::Index i = 0; i < report.transition.rows(); ++i) {
    std::vector<double> row(report.transition.row(i).begin(), report.transition.row(i).end());
    transition.push_back(row);
  }
  std::vector<std::string> path_names;
  for (const int s : report.dominant_path) path_names.push_back(tactic_name(s));
  return {{"threshold", report.threshold},
          {"tactics", std::move(tactics)},
          {"transition", std::move(transition)},
          {"dominant_path", report.dominant_path},
          {"dominant_path_names", path_names}};
}

void write_text(std::ostream& out, const TacticReport& report) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << "Emission probabilities (entries below " << report.threshold << " omitted)\n";
  for (std::size_t i = 0; i < report.pruned_emissions.size(); ++i) {
    out << tactic_name(static_cast<int>(i)) << " [" << report.labels[i] << "]:";
    out << std::fixed << std::setprecision(3);
    for (const auto& [action, p] : report.pruned_emissions[i]) out << ' ' << action << '=' << p;
    out << std::defaultfloat << '\n';
  }
  out << "\nTransition probabilities (row -> column)\n";
  render_heatmap(report.transition, out, HeatmapFormat::kText);
  out << "\nDominant path: " << format_path(report.dominant_path) << '\n';
  out.flags(flags);
  out.precision(precision);
}

}  // namespace tactics
