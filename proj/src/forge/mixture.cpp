#include "molforge/forge/mixture.hpp"

#include <algorithm>
#include <cmath>

#include "molforge/common/error.hpp"

namespace molforge::forge {

MixtureSampler::MixtureSampler(MixtureConfig config, const std::map<std::string, std::vector<ExampleRecord>>& pools)
    : rng_(config.seed) {
  double total = 0;
  for (const auto& [task, weight] : config.weights) {
    if (!std::isfinite(weight) || weight < 0) {
      throw ArgumentError("mixture weight for '" + task + "' must be a non-negative number");
    }
    if (weight == 0) continue;
    const auto it = pools.find(task);
    if (it == pools.end() || it->second.empty()) {
      throw ArgumentError("mixture task '" + task + "' has a positive weight but no records");
    }
    total += weight;
    tasks_.push_back(task);
    cumulative_.push_back(total);
    pools_.push_back(&it->second);
  }
  if (tasks_.empty()) throw ArgumentError("mixture needs at least one positive weight");
  for (auto& c : cumulative_) c /= total;
  cumulative_.back() = 1.0;
}

std::pair<std::string, const ExampleRecord*> MixtureSampler::next() {
  const double u = rng_.uniform01();
  const auto pick = static_cast<std::size_t>(
      std::upper_bound(cumulative_.begin(), cumulative_.end(), u) - cumulative_.begin());
  const auto task = std::min(pick, tasks_.size() - 1);
  const auto& pool = *pools_[task];
  return {tasks_[task], &pool[static_cast<std::size_t>(rng_.uniform_index(pool.size()))]};
}

std::vector<ExampleRecord> MixtureSampler::sample(std::size_t count) {
  std::vector<ExampleRecord> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(*next().second);
  return out;
}

}  // namespace molforge::forge
