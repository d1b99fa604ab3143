#include <algorithm>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "tactics/cli.hpp"
#include "tactics/hmm.hpp"
#include "tactics/log_ingest.hpp"
#include "tactics/model_io.hpp"
#include "tactics/simulator.hpp"
#include "test_support.hpp"

using namespace tactics;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "tactics");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({"train", "-i", "x.csv"}).code == kExitUsage);
  CHECK(run({"--help"}).code == kExitOk);

  const CliRun missing = run({"train", "-i", "/nonexistent/log.csv", "-M", "2", "-o", "/tmp/unused.json"});
  CHECK(missing.code == kExitUsage);
  CHECK(missing.err.find("no such file") != std::string::npos);
}

TEST_CASE("simulate is byte-reproducible per seed") {
  testing::TempDir dir;
  const CliRun a = run({"--seed", "7", "simulate", "--paper-model", "--n", "200", "--len", "100", "-o", dir.file("a.csv"),
                        "--sidecar", dir.file("a.json")});
  REQUIRE(a.code == kExitOk);
  const CliRun b = run({"--seed", "7", "simulate", "--paper-model", "--n", "200", "--len", "100", "-o", dir.file("b.csv")});
  REQUIRE(b.code == kExitOk);
  CHECK(slurp(dir.file("a.csv")) == slurp(dir.file("b.csv")));

  const auto events = parse_file(dir.file("a.csv"), LogFormat::kCsv);
  CHECK(events.size() == 20000);
  const auto sidecar = nlohmann::json::parse(slurp(dir.file("a.json")));
  CHECK(sidecar["hidden_paths"].size() == 200);
  CHECK(sidecar["metadata"]["seed"] == 7);
  CHECK(model_from_json(sidecar["planted_model"]).model == paper_planted_model());

  const CliRun c = run({"--seed", "8", "simulate", "--paper-model", "--n", "200", "--len", "100", "-o", dir.file("c.csv")});
  CHECK(slurp(dir.file("c.csv")) != slurp(dir.file("a.csv")));

  const CliRun tiny = run({"simulate", "--paper-model", "--n", "1", "--len", "1"});
  CHECK(tiny.code == kExitOk);
  CHECK(tiny.out.substr(0, 28) == "session_id,timestamp,action\n");
  CHECK(std::count(tiny.out.begin(), tiny.out.end(), '\n') == 2);

  CHECK(run({"simulate", "--n", "3", "--len", "2"}).code == kExitUsage);
  CHECK(run({"simulate", "--paper-model", "--n", "3"}).code == kExitUsage);
}

TEST_CASE("train, validate, report and decode round trip") {
  testing::TempDir dir;
  write(dir.file("log.csv"),
        "session_id,timestamp,action\n"
        "a,2020-01-01T00:00:00Z,Q\na,2020-01-01T00:00:01Z,V\na,2020-01-01T00:00:02Z,Q\n"
        "b,2020-01-01T00:00:00Z,V\nb,2020-01-01T00:00:01Z,V\nb,2020-01-01T00:00:02Z,Q\n");
  const CliRun trained = run({"--seed", "3", "--restarts", "3", "train", "-i", dir.file("log.csv"), "-M", "2", "-o",
                              dir.file("m.json")});
  REQUIRE(trained.code == kExitOk);
  CHECK(trained.out.find("log_likelihood = ") != std::string::npos);

  const ModelFile file = load_model(dir.file("m.json"));
  CHECK(file.provenance["config"]["seed"] == 3);
  CHECK(file.provenance["config"]["restarts"] == 3);
  const double reported = file.provenance["log_likelihood"];
  const EncodedCorpus corpus = encode(parse_file(dir.file("log.csv"), LogFormat::kCsv), file.model.alphabet());
  CHECK(std::abs(log_likelihood(file.model, corpus) - reported) < 1e-12);

  // Same flags, same bytes.
  REQUIRE(run({"--seed", "3", "--restarts", "3", "train", "-i", dir.file("log.csv"), "-M", "2", "-o",
               dir.file("m2.json")})
              .code == kExitOk);
  CHECK(slurp(dir.file("m.json")) == slurp(dir.file("m2.json")));

  const CliRun valid = run({"validate", "-m", dir.file("m.json")});
  CHECK(valid.code == kExitOk);
  CHECK(valid.out == "ok: M=2 T=2\n");

  const CliRun decoded = run({"decode", "-m", dir.file("m.json"), "-i", dir.file("log.csv")});
  REQUIRE(decoded.code == kExitOk);
  std::istringstream lines(decoded.out);
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    const auto rec = nlohmann::json::parse(line);
    CHECK(rec["tactics"].size() == 3);
    CHECK(rec["actions"].size() == 3);
    ++count;
  }
  CHECK(count == 2);

  const CliRun report = run({"--threshold", "0", "report", "-m", dir.file("m.json"), "--heatmap", dir.file("h.svg"),
                             "--json", dir.file("r.json")});
  REQUIRE(report.code == kExitOk);
  CHECK(report.out.find("Dominant path:") != std::string::npos);
  CHECK(slurp(dir.file("h.svg")).find("<svg") == 0);
  CHECK(nlohmann::json::parse(slurp(dir.file("r.json")))["threshold"] == 0.0);
}

TEST_CASE("decode with identity and single-state models") {
  testing::TempDir dir;
  const auto identity = testing::make_model({"Q", "V"}, {1, 0}, {{0, 1}, {1, 0}}, {{1, 0}, {0, 1}});
  save_model(dir.file("id.json"), ModelFile{identity, {}});
  write(dir.file("log.csv"), "session_id,timestamp,action\ns,2020-01-01T00:00:00Z,Q\ns,2020-01-01T00:00:01Z,V\n");
  const CliRun d = run({"decode", "-m", dir.file("id.json"), "-i", dir.file("log.csv")});
  REQUIRE(d.code == kExitOk);
  CHECK(nlohmann::json::parse(d.out)["tactics"] == std::vector<int>{0, 1});

  const auto single = testing::make_model({"Q", "V"}, {1}, {{1}}, {{0.4, 0.6}});
  save_model(dir.file("one.json"), ModelFile{single, {}});
  const CliRun e = run({"decode", "-m", dir.file("one.json"), "-i", dir.file("log.csv")});
  CHECK(nlohmann::json::parse(e.out)["tactics"] == std::vector<int>{0, 0});

  // An action the model has never seen is a runtime encoding error.
  write(dir.file("bad.csv"), "session_id,timestamp,action\ns,2020-01-01T00:00:00Z,Z\n");
  CHECK(run({"decode", "-m", dir.file("id.json"), "-i", dir.file("bad.csv")}).code == kExitRuntime);
}

TEST_CASE("select prints a table and the best M") {
  testing::TempDir dir;
  REQUIRE(run({"--seed", "1", "simulate", "--paper-model", "--n", "10", "--len", "20", "-o", dir.file("s.csv")}).code ==
          kExitOk);
  const CliRun one = run({"--restarts", "2", "select", "-i", dir.file("s.csv"), "--range", "3..3", "--json",
                          dir.file("bic.json")});
  REQUIRE(one.code == kExitOk);
  CHECK(one.out.find("best_M = 3") != std::string::npos);
  CHECK(std::count(one.out.begin(), one.out.end(), '\n') == 3);
  CHECK(nlohmann::json::parse(slurp(dir.file("bic.json")))["points"].size() == 1);

  CHECK(run({"select", "-i", dir.file("s.csv"), "--range", "5..2"}).code == kExitUsage);
  CHECK(run({"select", "-i", dir.file("s.csv"), "--range", "two"}).code == kExitUsage);
}

TEST_CASE("validate flags broken model files") {
  testing::TempDir dir;
  write(dir.file("bad.json"),
        R"({"format_version":1,"alphabet":["a"],"M":1,"prior":[0.5],"transition":[[1]],"emission":[[1]]})");
  const CliRun r = run({"validate", "-m", dir.file("bad.json")});
  CHECK(r.code == kExitRuntime);
  CHECK(r.err.find("prior") != std::string::npos);
  CHECK(run({"validate", "-m", dir.file("none.json")}).code == kExitUsage);
}
