#pragma once

#include <string>
#include <vector>

#include "molforge/chem/graph.hpp"
#include "molforge/common/rng.hpp"
#include "molforge/pattern/pattern.hpp"

namespace molforge::testing {

// All injective pattern->graph maps by plain enumeration of ordered atom
// tuples, checking every predicate and every pattern bond afterwards.
std::vector<std::vector<int>> brute_force_matches(const chem::MolecularGraph& graph, const pattern::Pattern& pattern);

// Random connected pattern text of 1..max_atoms atoms (chains, branches, one
// optional ring closure).
std::string random_pattern_text(Rng& rng, int max_atoms);

}  // namespace molforge::testing
