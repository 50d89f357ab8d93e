#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "molforge/toy/model.hpp"

namespace molforge::toy {

// Paper-scale rates are 5e-6 (backbone) and 5e-5 (projector); the toy keeps
// their 10x ratio at a larger absolute scale.
struct TrainConfig {
  int steps = 1000;
  int batch_size = 16;
  double lr_backbone = 1e-3;
  double lr_projector = 1e-2;
  double beta1 = 0.0;  // no momentum
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
  int log_every = 50;
  std::uint64_t seed = 0;

  // Throws ArgumentError unless lr_projector == 10 * lr_backbone, weight
  // decay is zero and sizes are positive.
  void validate() const;
};

// Linear decay to zero with no warmup: lr0 * (1 - step / steps).
double learning_rate(double lr0, int step, int steps);

struct StepRecord {
  int step = 0;
  double loss = 0;
  double lr_backbone = 0;
  double lr_projector = 0;
};

// Produces the next training example; called batch_size times per step.
using ExampleSource = std::function<Sequence()>;
using StepObserver = std::function<void(const StepRecord&)>;

struct TrainResult {
  std::vector<StepRecord> trace;  // every step
};

// Adaptive-moment updates with separate rates for the projector and the
// rest. Throws Error on a non-finite loss.
TrainResult train(ToyModel<float>& model, const ExampleSource& next_example, const TrainConfig& config,
                  const StepObserver& observer = {});

struct GenerateOptions {
  double temperature = 0.6;  // <= 0 selects greedy decoding
  int n = 1;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

// Continues the prompt until <eos> or max_seq_len; returns the decoded
// continuations (without the prompt). Rollout i uses derive_seed(seed, i).
std::vector<std::string> generate(const ToyModel<float>& model, const std::vector<int>& prompt_tokens,
                                  const std::optional<std::vector<float>>& molecule, const GenerateOptions& options);

struct GradCheckOptions {
  double epsilon = 1e-4;
  int samples = 200;
  bool projector_only = false;
  std::uint64_t seed = 0;
};

// Largest |analytic - numeric| / max(|analytic|, |numeric|, 1e-6) over a
// random subset of parameters, using central differences.
double grad_check(const ToyModel<double>& model, std::span<const Sequence> batch, const GradCheckOptions& options);

struct Checkpoint {
  ToyModel<float> model;
  TrainConfig train;
  std::uint64_t init_seed = 0;
};

// Magic, version, JSON header, then row-major little-endian float32 tensors.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
// Throws DataError on a malformed or mismatched file.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace molforge::toy
