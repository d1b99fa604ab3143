#pragma once

// Draws synthetic corpora from a known model (the planted-model oracle).

#include <cstdint>
#include <variant>
#include <vector>

#include "tactics/hmm.hpp"

namespace tactics {

struct FixedLength {
  int length;
};

struct UniformLength {
  int min;
  int max;  // inclusive
};

using LengthDistribution = std::variant<FixedLength, UniformLength>;

struct PlantedSpec {
  HmmModel model;
  int n_sequences;
  LengthDistribution lengths;
  std::uint64_t seed;

  void validate() const;
};

struct SampledCorpus {
  EncodedCorpus corpus;
  std::vector<std::vector<int>> hidden_paths;
};

/// Pure function of `spec`: same spec, same corpus and paths.
SampledCorpus sample(const PlantedSpec& spec);

/// Five tactics over {Q,V,S,W,T}. Emission rows carry the published
/// dominant values (S1: Q .92 T .06; S2: V .97; S3: V .98; S4: W .97;
/// S5: W .67 T .32) with each row's remaining mass spread evenly over its
/// unlisted actions.
/// Prior and transitions are chosen constants: prior peaks on S5 and the
/// greedy transition walk from there is S5 S1 S2 S3 S4, with S4 most
/// likely to stay put.
HmmModel paper_planted_model();

}  // namespace tactics
