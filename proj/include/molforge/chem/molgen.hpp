#pragma once

#include "molforge/chem/graph.hpp"
#include "molforge/common/rng.hpp"

namespace molforge::chem {

// Knobs for random drug-like-ish graphs. Probabilities are per opportunity.
struct MolGenConfig {
  int min_heavy_atoms = 3;
  int max_heavy_atoms = 20;
  double aromatic_ring_prob = 0.45;  // per ring-attachment opportunity
  double ring_closure_prob = 0.1;
  double multiple_bond_prob = 0.15;
  double charge_prob = 0.04;
  double isotope_prob = 0.02;
  double chiral_prob = 0.15;
  double second_fragment_prob = 0.0;
  double nitrogen_weight = 1.0;  // relative to carbon weight 6
};

// Valence-consistent molecule (no overflow warnings). Chirality tags are
// placed only on atoms whose own refined class and neighbor classes are all
// distinct, so canonical output never hinges on arbitrary tie-breaks.
MolecularGraph random_molecule(Rng& rng, const MolGenConfig& config = {});

// Uniformly random relabeling of the graph.
MolecularGraph random_relabel(const MolecularGraph& graph, Rng& rng);

}  // namespace molforge::chem
