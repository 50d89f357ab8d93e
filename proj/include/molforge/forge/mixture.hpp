#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "molforge/common/rng.hpp"
#include "molforge/forge/records.hpp"

namespace molforge::forge {

struct MixtureConfig {
  std::map<std::string, double> weights;  // task -> non-negative weight
  std::uint64_t seed = 0;
};

// Each draw picks a task with probability proportional to its weight, then a
// record uniformly with replacement from that task's pool. The stream is a
// pure function of (config, pools).
class MixtureSampler {
 public:
  // Throws ArgumentError on negative weights, all-zero weights, or a
  // positive-weight task with a missing or empty pool.
  MixtureSampler(MixtureConfig config, const std::map<std::string, std::vector<ExampleRecord>>& pools);

  std::pair<std::string, const ExampleRecord*> next();
  std::vector<ExampleRecord> sample(std::size_t count);

 private:
  std::vector<std::string> tasks_;
  std::vector<double> cumulative_;
  std::vector<const std::vector<ExampleRecord>*> pools_;
  Rng rng_;
};

}  // namespace molforge::forge
