#include "tactics/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <regex>
#include <sstream>

#include "tactics/errors.hpp"
#include "tactics/log_ingest.hpp"
#include "tactics/model_io.hpp"
#include "tactics/model_selection.hpp"
#include "tactics/simulator.hpp"
#include "tactics/tactic_report.hpp"
#include "tactics/training.hpp"

namespace tactics {

namespace {

struct GlobalOptions {
  TrainConfig train;
  std::string format = "csv";
  std::string alphabet;
  std::string unknown = "strict";
  std::string sample_size_mode = "events";
  double threshold = kDefaultPruneThreshold;
};

struct IngestResult {
  EncodedCorpus corpus;
  std::vector<std::string> warnings;
};

IngestResult ingest(const std::string& path, const GlobalOptions& opts, const ActionAlphabet* fixed_alphabet) {
  const auto events = parse_file(path, parse_log_format(opts.format));
  if (events.empty()) throw ArgumentError(path + ": log contains no events");
  std::optional<ActionAlphabet> alphabet;
  if (fixed_alphabet) {
    alphabet = *fixed_alphabet;
  } else if (!opts.alphabet.empty()) {
    alphabet = parse_alphabet(opts.alphabet);
  } else {
    alphabet = build_alphabet(events);
  }
  std::vector<std::string> warnings;
  EncodedCorpus corpus = encode(events, *alphabet, parse_unknown_actions(opts.unknown), &warnings);
  return IngestResult{std::move(corpus), std::move(warnings)};
}

// FNV-1a over the alphabet and every observation, for provenance records.
std::string corpus_digest(const EncodedCorpus& corpus) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix = [&h](std::uint64_t byte) {
    h ^= byte;
    h *= 0x100000001b3ULL;
  };
  for (const auto& s : corpus.alphabet().symbols()) {
    for (const unsigned char c : s) mix(c);
    mix(0);
  }
  for (const auto& seq : corpus.sequences()) {
    for (const unsigned char c : seq.session_id) mix(c);
    mix(0);
    for (const int o : seq.observations) mix(static_cast<std::uint64_t>(o) + 1);
    mix(0);
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

nlohmann::json config_json(const TrainConfig& c) {
  return {{"seed", c.seed}, {"restarts", c.restarts}, {"max_iters", c.max_iters}, {"tol", c.tol}};
}

StateRange parse_range(const std::string& text) {
  static const std::regex pattern(R"(^\s*(\d+)\s*(?:\.\.\s*(\d+)\s*)?$)");
  std::smatch m;
  if (!std::regex_match(text, m, pattern)) throw ArgumentError("state range must look like 2..8, got '" + text + "'");
  const int lo = std::stoi(m[1].str());
  const int hi = m[2].matched ? std::stoi(m[2].str()) : lo;
  if (lo < 1) throw ArgumentError("state range must start at 1 or above");
  if (hi < lo) throw ArgumentError("empty state range " + text);
  return StateRange{lo, hi};
}

SampleSizeMode parse_sample_size_mode(const std::string& name) {
  if (name == "events") return SampleSizeMode::kEvents;
  if (name == "sequences") return SampleSizeMode::kSequences;
  throw ArgumentError("unknown sample size mode '" + name + "' (expected events or sequences)");
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open for writing");
  return out;
}

void print_warnings(std::ostream& err, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discover latent search tactics in session action logs with hidden Markov models", "tactics"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.train.seed, "Random seed for restarts and simulation");
  app.add_option("--restarts", g.train.restarts, "Independent EM runs per fit")->check(CLI::PositiveNumber);
  app.add_option("--max-iters", g.train.max_iters, "EM iteration cap per run")->check(CLI::PositiveNumber);
  app.add_option("--tol", g.train.tol, "Stop when the log-likelihood gain falls below this")
      ->check(CLI::PositiveNumber);
  app.add_option("--threads", g.train.threads, "Worker threads for restarts (0 = all cores)");
  app.add_option("--format", g.format, "Log format")->check(CLI::IsMember({"csv", "jsonl"}));
  app.add_option("--alphabet", g.alphabet, "Comma-separated action alphabet, e.g. Q,V,S,W,T");
  app.add_option("--unknown", g.unknown, "Handling of actions outside the alphabet")
      ->check(CLI::IsMember({"strict", "drop"}));
  app.add_option("--sample-size-mode", g.sample_size_mode, "BIC sample size: events or sequences")
      ->check(CLI::IsMember({"events", "sequences"}));
  app.add_option("--threshold", g.threshold, "Emission pruning threshold")->check(CLI::Range(0.0, 0.999999));

  // train
  std::string train_input, train_out;
  int train_states = 0;
  auto* train_cmd = app.add_subcommand("train", "Fit an HMM with a fixed number of tactics");
  train_cmd->add_option("-i,--input", train_input, "Session log")->required();
  train_cmd->add_option("-M,--states", train_states, "Number of hidden tactics")->required();
  train_cmd->add_option("-o,--out", train_out, "Model file to write")->required();

  // select
  std::string select_input, select_range, select_json;
  auto* select_cmd = app.add_subcommand("select", "Choose the number of tactics by BIC");
  select_cmd->add_option("-i,--input", select_input, "Session log")->required();
  select_cmd->add_option("--range", select_range, "Candidate state counts, e.g. 2..8")->required();
  select_cmd->add_option("--json", select_json, "Write the BIC curve as JSON");

  // decode
  std::string decode_model, decode_input, decode_out;
  auto* decode_cmd = app.add_subcommand("decode", "Viterbi tactic paths per session (JSON Lines)");
  decode_cmd->add_option("-m,--model", decode_model, "Model file")->required();
  decode_cmd->add_option("-i,--input", decode_input, "Session log")->required();
  decode_cmd->add_option("-o,--out", decode_out, "Output file (default: stdout)");

  // simulate
  bool sim_paper = false;
  std::string sim_model, sim_out, sim_sidecar;
  int sim_n = 0, sim_len = 0, sim_len_min = 0, sim_len_max = 0;
  auto* sim_cmd = app.add_subcommand("simulate", "Sample a synthetic corpus from a planted model");
  auto* paper_flag = sim_cmd->add_flag("--paper-model", sim_paper, "Use the built-in five-tactic model");
  auto* model_opt = sim_cmd->add_option("-m,--model", sim_model, "Model file to sample from");
  paper_flag->excludes(model_opt);
  sim_cmd->add_option("-n,--n", sim_n, "Number of sessions")->required()->check(CLI::PositiveNumber);
  auto* len_opt = sim_cmd->add_option("--len", sim_len, "Fixed session length")->check(CLI::PositiveNumber);
  auto* len_min = sim_cmd->add_option("--len-min", sim_len_min, "Minimum session length")->check(CLI::PositiveNumber);
  auto* len_max = sim_cmd->add_option("--len-max", sim_len_max, "Maximum session length")->check(CLI::PositiveNumber);
  len_opt->excludes(len_min)->excludes(len_max);
  len_min->needs(len_max);
  len_max->needs(len_min);
  sim_cmd->add_option("-o,--out", sim_out, "Corpus CSV (default: stdout)");
  sim_cmd->add_option("--sidecar", sim_sidecar, "JSON file with the planted model and hidden paths");

  // report
  std::string report_model, report_heatmap, report_json, report_text;
  auto* report_cmd = app.add_subcommand("report", "Emission table, transition heatmap and dominant path");
  report_cmd->add_option("-m,--model", report_model, "Model file")->required();
  report_cmd->add_option("--heatmap", report_heatmap, "SVG heatmap of the transition matrix");
  report_cmd->add_option("--json", report_json, "Full report as JSON");
  report_cmd->add_option("--text", report_text, "Plain-text report file (also printed)");

  // validate
  std::string validate_model;
  auto* validate_cmd = app.add_subcommand("validate", "Check a model file against the schema");
  validate_cmd->add_option("-m,--model", validate_model, "Model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train_cmd) {
      const IngestResult in = ingest(train_input, g, nullptr);
      print_warnings(err, in.warnings);
      const TrainResult fit = train(in.corpus, train_states, g.train);
      print_warnings(err, fit.warnings);
      ModelFile file{fit.model,
                     {{"command", "train"},
                      {"config", config_json(g.train)},
                      {"corpus_digest", corpus_digest(in.corpus)},
                      {"sequences", in.corpus.sequences().size()},
                      {"events", in.corpus.total_events()},
                      {"log_likelihood", fit.log_likelihood},
                      {"iterations", fit.iterations},
                      {"best_restart", fit.best_restart}}};
      save_model(train_out, file);
      out << std::setprecision(17) << "log_likelihood = " << fit.log_likelihood << '\n'
          << "iterations = " << fit.iterations << '\n';
    } else if (*select_cmd) {
      const StateRange range = parse_range(select_range);
      const SampleSizeMode mode = parse_sample_size_mode(g.sample_size_mode);
      const IngestResult in = ingest(select_input, g, nullptr);
      print_warnings(err, in.warnings);
      const BicCurve curve = sweep(in.corpus, range, g.train, mode);
      write_table(out, curve);
      out << "best_M = " << curve.best_num_states << '\n';
      if (!select_json.empty()) {
        nlohmann::json doc = to_json(curve, mode);
        doc["config"] = config_json(g.train);
        doc["corpus_digest"] = corpus_digest(in.corpus);
        open_output(select_json) << doc.dump(2) << '\n';
      }
    } else if (*decode_cmd) {
      const ModelFile file = load_model(decode_model);
      const IngestResult in = ingest(decode_input, g, &file.model.alphabet());
      print_warnings(err, in.warnings);
      std::ofstream file_out;
      if (!decode_out.empty()) file_out = open_output(decode_out);
      std::ostream& sink = decode_out.empty() ? out : file_out;
      const auto names = decode(in.corpus);
      for (std::size_t s = 0; s < in.corpus.sequences().size(); ++s) {
        const Sequence& seq = in.corpus.sequences()[s];
        const ViterbiPath path = viterbi(file.model, seq);
        nlohmann::json rec = {{"session_id", seq.session_id},
                              {"actions", names[s]},
                              {"tactics", path.states},
                              {"log_prob", path.log_prob}};
        sink << rec.dump() << '\n';
      }
    } else if (*sim_cmd) {
      if (!sim_paper && sim_model.empty()) throw ArgumentError("simulate needs --paper-model or --model");
      LengthDistribution lengths = FixedLength{sim_len};
      if (*len_min) {
        lengths = UniformLength{sim_len_min, sim_len_max};
      } else if (!*len_opt) {
        throw ArgumentError("simulate needs --len or --len-min/--len-max");
      }
      HmmModel model = sim_paper ? paper_planted_model() : load_model(sim_model).model;
      const PlantedSpec spec{model, sim_n, lengths, g.train.seed};
      const SampledCorpus sampled = sample(spec);

      if (sim_out.empty()) {
        write_csv(out, sampled.corpus);
      } else {
        auto csv = open_output(sim_out);
        write_csv(csv, sampled.corpus);
      }
      if (!sim_sidecar.empty()) {
        nlohmann::json paths = nlohmann::json::object();
        for (std::size_t s = 0; s < sampled.hidden_paths.size(); ++s) {
          paths[sampled.corpus.sequences()[s].session_id] = sampled.hidden_paths[s];
        }
        nlohmann::json length_json = std::holds_alternative<FixedLength>(lengths)
                                         ? nlohmann::json{{"fixed", sim_len}}
                                         : nlohmann::json{{"min", sim_len_min}, {"max", sim_len_max}};
        nlohmann::json meta = {{"seed", g.train.seed}, {"n_sequences", sim_n}, {"lengths", length_json}};
        if (sim_paper) {
          meta["model_source"] = "built-in five-tactic model";
          meta["note"] =
              "emission values >= 0.05 are the published ones; residual row mass is spread uniformly over the "
              "remaining actions; prior and transition values are chosen constants, not published numbers";
        } else {
          meta["model_source"] = sim_model;
        }
        nlohmann::json doc = {{"planted_model", to_json(ModelFile{model, {}})},
                              {"hidden_paths", std::move(paths)},
                              {"metadata", std::move(meta)}};
        open_output(sim_sidecar) << doc.dump(2) << '\n';
      }
    } else if (*report_cmd) {
      const ModelFile file = load_model(report_model);
      const TacticReport report = build_report(file.model, g.threshold);
      std::ostringstream text;
      write_text(text, report);
      out << text.str();
      if (!report_text.empty()) open_output(report_text) << text.str();
      if (!report_json.empty()) open_output(report_json) << to_json(report).dump(2) << '\n';
      if (!report_heatmap.empty()) {
        auto svg = open_output(report_heatmap);
        render_heatmap(report.transition, svg, HeatmapFormat::kSvg);
      }
    } else if (*validate_cmd) {
      const ModelFile file = load_model(validate_model);
      out << "ok: M=" << file.model.num_states() << " T=" << file.model.num_symbols() << '\n';
    }
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace tactics
