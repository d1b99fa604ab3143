#pragma once

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "tactics/hmm.hpp"
#include "tactics/rng.hpp"
#include "tactics/training.hpp"

namespace testing {

inline tactics::ActionAlphabet letters(int t) {
  std::vector<std::string> s;
  for (int k = 0; k < t; ++k) s.push_back(std::string(1, static_cast<char>('a' + k)));
  return tactics::ActionAlphabet(s);
}

inline tactics::HmmModel random_model(int m, int t, std::uint64_t seed) {
  tactics::Rng rng(seed);
  return tactics::random_model(letters(t), m, rng);
}

inline tactics::Sequence random_sequence(int n, int t, std::uint64_t seed) {
  tactics::Rng rng(seed);
  std::uniform_int_distribution<int> pick(0, t - 1);
  tactics::Sequence seq{"r" + std::to_string(seed), {}};
  for (int k = 0; k < n; ++k) seq.observations.push_back(pick(rng));
  return seq;
}

inline tactics::HmmModel make_model(std::vector<std::string> alphabet, std::vector<double> prior,
                                    std::vector<std::vector<double>> a, std::vector<std::vector<double>> b) {
  const auto m = static_cast<Eigen::Index>(prior.size());
  tactics::Vector p(m);
  tactics::Matrix ta(m, m);
  tactics::Matrix eb(m, static_cast<Eigen::Index>(alphabet.size()));
  for (Eigen::Index i = 0; i < m; ++i) {
    p(i) = prior[i];
    for (Eigen::Index j = 0; j < m; ++j) ta(i, j) = a[i][j];
    for (Eigen::Index k = 0; k < eb.cols(); ++k) eb(i, k) = b[i][k];
  }
  return tactics::HmmModel(tactics::ActionAlphabet(std::move(alphabet)), p, ta, eb);
}

// Deterministic alternating 2-state model with identity emissions.
inline tactics::HmmModel alternating_model() {
  return make_model({"a", "b"}, {1, 0}, {{0, 1}, {1, 0}}, {{1, 0}, {0, 1}});
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("tactics_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
