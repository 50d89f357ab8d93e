#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "molforge/chem/graph.hpp"

namespace molforge::fp {

constexpr int kDefaultBits = 2048;
constexpr int kDefaultRadius = 2;

struct EnvironmentId {
  std::uint64_t value = 0;
  int center = 0;
  int radius = 0;
};

struct Fingerprint {
  int n_bits = kDefaultBits;
  std::vector<int> set_bits;  // sorted, unique, each < n_bits
  // bit -> (center atom, radius) of every surviving environment folded onto it.
  std::map<int, std::vector<std::pair<int, int>>> environment_log;

  bool test(int bit) const;
  std::vector<float> dense() const;
  // "0101..." debugging form.
  std::string to_bitstring() const;
};

// Hash of (atomic number, heavy degree, total H, formal charge, in-ring,
// aromatic). Chirality does not participate.
std::uint64_t atom_invariant(const chem::MolecularGraph& graph, int atom);

// Surviving environments in emission order (radius, then canonical rank of
// the center). An environment is dropped when an earlier one covered exactly
// the same atom set.
std::vector<EnvironmentId> morgan_environments(const chem::MolecularGraph& graph, int radius = kDefaultRadius);

Fingerprint morgan_fingerprint(const chem::MolecularGraph& graph, int radius = kDefaultRadius,
                               int n_bits = kDefaultBits, bool log_environments = false);

}  // namespace molforge::fp
