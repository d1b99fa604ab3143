#pragma once

// JSON model files shared by the train, select, decode and report commands.
//
//   {
//     "format_version": 1,
//     "alphabet": ["Q", "V", ...],
//     "M": 5,
//     "prior": [...], "transition": [[...], ...], "emission": [[...], ...],
//     "provenance": { free-form }
//   }
//
// Numbers are written in shortest round-trip form, so load(save(m)) == m
// exactly and save(load(save(m))) is byte-identical.

#include <string>

#include <json.hpp>

#include "tactics/hmm.hpp"

namespace tactics {

inline constexpr int kModelFormatVersion = 1;

struct ModelFile {
  HmmModel model;
  nlohmann::json provenance = nlohmann::json::object();
};

nlohmann::json to_json(const ModelFile& file);

/// Throws ValidationError on schema or invariant violations.
ModelFile model_from_json(const nlohmann::json& doc);

std::string dump_model(const ModelFile& file);
void save_model(const std::string& path, const ModelFile& file);
ModelFile load_model(const std::string& path);

}  // namespace tactics
