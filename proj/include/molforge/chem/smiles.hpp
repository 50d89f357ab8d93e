#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "molforge/chem/graph.hpp"
#include "molforge/common/error.hpp"

namespace molforge::chem {

class SmilesError : public DataError {
 public:
  SmilesError(std::string text, std::vector<ParseDiagnostics> diagnostics);
  const std::vector<ParseDiagnostics>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<ParseDiagnostics> diagnostics_;
};

struct ParseResult {
  std::optional<MolecularGraph> graph;
  std::vector<ParseDiagnostics> diagnostics;  // first error (if any) plus warnings

  bool ok() const { return graph.has_value(); }
};

// Supported: organic-subset and bracket atoms (isotope, @/@@, H count, charge,
// atom class ignored), - = # : bonds (/ and \ read as single with a warning),
// branches, ring closures 0-9 and %nn, dot-separated fragments. Parsing stops
// at the first whitespace so "SMILES name" lines are accepted.
ParseResult try_parse_smiles(std::string_view text);

// Throws SmilesError carrying the diagnostics.
MolecularGraph parse_smiles(std::string_view text);

// Per-atom ranks 0..n-1 from iterated neighborhood refinement of
// (element, isotope, degree, hydrogens, charge, aromaticity, ring flag,
// chirality flag). Remaining ties: the lowest tied class gives up its lowest
// original index, then refinement resumes.
std::vector<int> canonical_ranks(const MolecularGraph& graph);

// Ranks after refinement only, before any tie is broken.
std::vector<int> refined_invariant_classes(const MolecularGraph& graph);

// Canonical SMILES: depth-first from the lowest-ranked atom of each fragment,
// neighbors in rank order; fragments ordered by their lowest rank.
std::string write_smiles(const MolecularGraph& graph);

// parse + write.
std::string canonical_smiles(std::string_view text);

}  // namespace molforge::chem
