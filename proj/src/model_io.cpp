#include "tactics/model_io.hpp"

#include <fstream>
#include <sstream>

#include "tactics/errors.hpp"

namespace tactics {

namespace {

std::vector<double> numbers(const nlohmann::json& node, const std::string& what, std::size_t expected) {
  if (!node.is_array()) throw ValidationError(what + " must be an array");
  if (node.size() != expected) {
    throw ValidationError(what + " has " + std::to_string(node.size()) + " entries, expected " +
                          std::to_string(expected));
  }
  std::vector<double> out;
  for (const auto& v : node) {
    if (!v.is_number()) throw ValidationError(what + " contains a non-numeric entry");
    out.push_back(v.get<double>());
  }
  return out;
}

Matrix matrix(const nlohmann::json& node, const std::string& what, std::size_t rows, std::size_t cols) {
  if (!node.is_array() || node.size() != rows) {
    throw ValidationError(what + " must be an array of " + std::to_string(rows) + " rows");
  }
  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const auto row = numbers(node[i], what + " row " + std::to_string(i), cols);
    for (std::size_t k = 0; k < cols; ++k) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
  }
  return out;
}

const nlohmann::json& require(const nlohmann::json& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end()) throw ValidationError(std::string("model file is missing '") + key + "'");
  return *it;
}

}  // namespace

nlohmann::json to_json(const ModelFile& file) {
  const HmmModel& m = file.model;
  const auto rows = [](const Matrix& mat) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
      out.push_back(std::vector<double>(mat.row(i).begin(), mat.row(i).end()));
    }
    return out;
  };
  return {{"format_version", kModelFormatVersion},
          {"alphabet", m.alphabet().symbols()},
          {"M", m.num_states()},
          {"prior", std::vector<double>(m.prior().begin(), m.prior().end())},
          {"transition", rows(m.transition())},
          {"emission", rows(m.emission())},
          {"provenance", file.provenance}};
}

ModelFile model_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ValidationError("model file must be a JSON object");
  const auto& version = require(doc, "format_version");
  if (!version.is_number_integer() || version.get<int>() != kModelFormatVersion) {
    throw ValidationError("unsupported model format_version (expected " + std::to_string(kModelFormatVersion) + ")");
  }
  const auto& alphabet_node = require(doc, "alphabet");
  if (!alphabet_node.is_array()) throw ValidationError("alphabet must be an array of strings");
  std::vector<std::string> symbols;
  for (const auto& s : alphabet_node) {
    if (!s.is_string()) throw ValidationError("alphabet must be an array of strings");
    symbols.push_back(s.get<std::string>());
  }
  const auto& m_node = require(doc, "M");
  if (!m_node.is_number_integer() || m_node.get<long long>() < 1) throw ValidationError("M must be a positive integer");
  const auto m = static_cast<std::size_t>(m_node.get<long long>());

  try {
    ActionAlphabet alphabet(std::move(symbols));
    const auto t = alphabet.size();
    const auto prior_values = numbers(require(doc, "prior"), "prior", m);
    Vector prior = Eigen::Map<const Vector>(prior_values.data(), static_cast<Eigen::Index>(m));
    Matrix transition = matrix(require(doc, "transition"), "transition", m, m);
    Matrix emission = matrix(require(doc, "emission"), "emission", m, t);
    ModelFile out{HmmModel(std::move(alphabet), std::move(prior), std::move(transition), std::move(emission)),
                  nlohmann::json::object()};
    if (const auto it = doc.find("provenance"); it != doc.end()) out.provenance = *it;
    return out;
  } catch (const ArgumentError& e) {
    throw ValidationError(std::string("invalid alphabet: ") + e.what());
  }
}

std::string dump_model(const ModelFile& file) { return to_json(file).dump(2) + "\n"; }

void save_model(const std::string& path, const ModelFile& file) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open for writing");
  out << dump_model(file);
  if (!out) throw IoError(path + ": write failed");
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": no such file or not readable");
  std::stringstream buffer;
  buffer << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(buffer.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path + ": not valid JSON: " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace tactics
