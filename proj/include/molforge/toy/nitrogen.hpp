#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "molforge/chem/molgen.hpp"
#include "molforge/toy/model.hpp"
#include "molforge/toy/train.hpp"

namespace molforge::toy {

// "Does the molecule contain nitrogen?" with the molecule given only as a
// fingerprint behind the molecule token.
inline constexpr const char* kNitrogenPrompt = "Does <molecule> contain nitrogen?";

struct NitrogenConfig {
  int molecules = 2000;        // balanced, distinct canonical SMILES
  double test_fraction = 0.2;
  bool zero_molecule = false;  // feed all-zero vectors in training and evaluation
  std::uint64_t seed = 0;
  chem::MolGenConfig generator = default_generator();
  ToyDecoderConfig model;
  TrainConfig train = default_train();

  // 300 steps of 32 examples.
  static TrainConfig default_train();
  // At most 8 heavy atoms, so each fingerprint carries few bits unrelated to
  // nitrogen.
  static chem::MolGenConfig default_generator();
};

struct NitrogenResult {
  double test_accuracy = 0;
  int train_size = 0;
  int test_size = 0;
  double train_loss = 0;  // mean over the last 20 steps
  double seconds = 0;     // corpus, training and evaluation
  ToyModel<float> model;
};

struct NitrogenExample {
  std::string smiles;
  std::vector<float> fingerprint;
  bool has_nitrogen = false;
};

// Balanced, shuffled corpus of distinct generated molecules.
std::vector<NitrogenExample> nitrogen_corpus(int count, std::uint64_t seed, const chem::MolGenConfig& generator);

// Held-out accuracy uses greedy decoding; an answer counts only when it is
// exactly "yes" or "no" and matches the label.
NitrogenResult run_nitrogen_experiment(const NitrogenConfig& config);

}  // namespace molforge::toy
