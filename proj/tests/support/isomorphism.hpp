#pragma once

#include "molforge/chem/graph.hpp"

namespace molforge::testing {

// Exhaustive backtracking isomorphism test. Atoms must agree on element,
// charge, isotope, total hydrogens, aromaticity and presence of a chirality
// tag; bonds on order; tagged centers on handedness once neighbor order is
// mapped across.
bool isomorphic(const chem::MolecularGraph& a, const chem::MolecularGraph& b);

}  // namespace molforge::testing
