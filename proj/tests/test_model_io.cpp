#include <fstream>

#include "doctest.h"
#include "tactics/errors.hpp"
#include "tactics/model_io.hpp"
#include "tactics/simulator.hpp"
#include "test_support.hpp"

using namespace tactics;

TEST_CASE("save -> load -> save is byte-stable and exact") {
  testing::TempDir dir;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ModelFile file{testing::random_model(1 + static_cast<int>(seed % 6), 5, seed), {{"seed", seed}}};
    const std::string path = dir.file("m.json");
    save_model(path, file);
    const ModelFile loaded = load_model(path);
    CHECK(loaded.model == file.model);
    CHECK(loaded.provenance == file.provenance);
    CHECK(dump_model(loaded) == dump_model(file));
    const auto seq = testing::random_sequence(50, 5, seed);
    CHECK(forward(loaded.model, seq).log_likelihood == forward(file.model, seq).log_likelihood);
  }
}

TEST_CASE("schema fields are present") {
  const auto doc = to_json(ModelFile{paper_planted_model(), {}});
  CHECK(doc["format_version"] == kModelFormatVersion);
  CHECK(doc["M"] == 5);
  CHECK(doc["alphabet"].size() == 5);
  CHECK(doc["transition"].size() == 5);
  CHECK(doc["emission"][0].size() == 5);
}

TEST_CASE("load rejects invariant and schema violations") {
  auto doc = to_json(ModelFile{paper_planted_model(), {}});
  {
    auto bad = doc;
    bad["transition"][0][0] = 0.5;
    CHECK_THROWS_AS(model_from_json(bad), ValidationError);
  }
  {
    auto bad = doc;
    bad["emission"][2][1] = "x";
    CHECK_THROWS_AS(model_from_json(bad), ValidationError);
  }
  {
    auto bad = doc;
    bad.erase("prior");
    CHECK_THROWS_AS(model_from_json(bad), ValidationError);
  }
  {
    auto bad = doc;
    bad["format_version"] = 99;
    CHECK_THROWS_AS(model_from_json(bad), ValidationError);
  }
  {
    auto bad = doc;
    bad["M"] = 4;
    CHECK_THROWS_AS(model_from_json(bad), ValidationError);
  }
  {
    auto bad = doc;
    bad["alphabet"][1] = "Q";
    CHECK_THROWS_AS(model_from_json(bad), ValidationError);
  }
  CHECK_THROWS_AS(model_from_json(nlohmann::json::array()), ValidationError);
}

TEST_CASE("file errors") {
  CHECK_THROWS_AS(load_model("/nonexistent/model.json"), IoError);
  testing::TempDir dir;
  std::ofstream(dir.file("junk.json")) << "{ not json";
  CHECK_THROWS_AS(load_model(dir.file("junk.json")), ValidationError);
}
