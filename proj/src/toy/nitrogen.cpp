#include "molforge/toy/nitrogen.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include "molforge/chem/molgen.hpp"
#include "molforge/chem/smiles.hpp"
#include "molforge/common/error.hpp"
#include "molforge/common/rng.hpp"
#include "molforge/fp/fingerprint.hpp"

namespace molforge::toy {
namespace {

bool contains_nitrogen(const chem::MolecularGraph& graph) {
  const auto atoms = graph.atoms();
  return std::any_of(atoms.begin(), atoms.end(), [](const chem::Atom& atom) { return atom.element == 7; });
}

Sequence to_sequence(const NitrogenExample& example, const EncodedExample& encoded, bool zero_molecule) {
  Sequence seq{encoded.tokens, encoded.loss_mask, example.fingerprint};
  if (zero_molecule) std::fill(seq.molecule->begin(), seq.molecule->end(), 0.0f);
  return seq;
}

}  // namespace

TrainConfig NitrogenConfig::default_train() {
  TrainConfig config;
  config.steps = 300;
  config.batch_size = 32;
  return config;
}

chem::MolGenConfig NitrogenConfig::default_generator() {
  chem::MolGenConfig config;
  config.max_heavy_atoms = 8;
  return config;
}

std::vector<NitrogenExample> nitrogen_corpus(int count, std::uint64_t seed, const chem::MolGenConfig& generator) {
  if (count < 2 || count % 2 != 0) throw ArgumentError("nitrogen corpus size must be even and at least 2");
  Rng rng(derive_seed(seed, 0));
  const std::size_t per_class = static_cast<std::size_t>(count / 2);
  std::vector<NitrogenExample> positives, negatives;
  std::set<std::string> seen;
  while (positives.size() < per_class || negatives.size() < per_class) {
    const auto graph = chem::random_molecule(rng, generator);
    const bool label = contains_nitrogen(graph);
    auto& bucket = label ? positives : negatives;
    if (bucket.size() >= per_class) continue;
    auto smiles = chem::write_smiles(graph);
    if (!seen.insert(smiles).second) continue;
    bucket.push_back({std::move(smiles), fp::morgan_fingerprint(graph).dense(), label});
  }
  std::vector<NitrogenExample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (auto& e : positives) out.push_back(std::move(e));
  for (auto& e : negatives) out.push_back(std::move(e));
  rng.shuffle(out);
  return out;
}

NitrogenResult run_nitrogen_experiment(const NitrogenConfig& config) {
  if (!(config.test_fraction > 0 && config.test_fraction < 1)) {
    throw ArgumentError("test_fraction must lie strictly between 0 and 1");
  }
  const auto start = std::chrono::steady_clock::now();
  const auto corpus = nitrogen_corpus(config.molecules, config.seed, config.generator);
  const auto test_size = static_cast<std::size_t>(config.test_fraction * static_cast<double>(corpus.size()));
  const std::size_t train_size = corpus.size() - test_size;

  const auto yes = encode_example(kNitrogenPrompt, "yes", config.model.max_seq_len);
  const auto no = encode_example(kNitrogenPrompt, "no", config.model.max_seq_len);
  NitrogenResult result;
  result.train_size = static_cast<int>(train_size);
  result.test_size = static_cast<int>(test_size);
  result.model = ToyModel<float>::initialize(config.model, derive_seed(config.seed, 1));

  Rng sampler(derive_seed(config.seed, 2));
  TrainConfig train_config = config.train;
  train_config.seed = config.seed;
  const auto trained = train(
      result.model,
      [&] {
        const auto& example = corpus[static_cast<std::size_t>(sampler.uniform_index(train_size))];
        return to_sequence(example, example.has_nitrogen ? yes : no, config.zero_molecule);
      },
      train_config);
  const std::size_t tail = std::min<std::size_t>(20, trained.trace.size());
  for (std::size_t i = trained.trace.size() - tail; i < trained.trace.size(); ++i) {
    result.train_loss += trained.trace[i].loss / static_cast<double>(tail);
  }

  const auto prompt = encode_prompt(kNitrogenPrompt);
  GenerateOptions greedy;
  greedy.temperature = 0;
  int correct = 0;
  for (std::size_t i = train_size; i < corpus.size(); ++i) {
    auto fingerprint = corpus[i].fingerprint;
    if (config.zero_molecule) std::fill(fingerprint.begin(), fingerprint.end(), 0.0f);
    const auto answer = generate(result.model, prompt, fingerprint, greedy).front();
    if (answer == (corpus[i].has_nitrogen ? "yes" : "no")) ++correct;
  }
  result.test_accuracy = static_cast<double>(correct) / static_cast<double>(test_size);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace molforge::toy
