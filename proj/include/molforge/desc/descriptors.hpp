#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "molforge/chem/graph.hpp"
#include "molforge/pattern/pattern.hpp"

namespace molforge::desc {

enum class DescriptorKind : std::uint8_t { integer, real };

struct DescriptorSpec {
  std::string name;
  DescriptorKind kind = DescriptorKind::real;
  std::string units;
};

struct DescriptorVector {
  std::map<std::string, double> values;
  std::string molecule;  // canonical SMILES
  std::vector<std::string> diagnostics;
};

// The twelve scalar descriptors followed by one fr_* count per entry of the
// builtin fragment list. Names are unique.
const std::vector<DescriptorSpec>& descriptor_catalog();

// Throws ArgumentError naming every valid descriptor when `name` is unknown.
const DescriptorSpec& descriptor_spec(std::string_view name);
std::vector<DescriptorSpec> descriptor_specs(std::span<const std::string> names);

// One value per spec, independent of atom order.
DescriptorVector compute_descriptors(const chem::MolecularGraph& graph, std::span<const DescriptorSpec> specs);

// Standard atomic weights plus hydrogens; isotope-labelled atoms use the
// isotope's mass.
double mol_weight(const chem::MolecularGraph& graph);
int heavy_atom_count(const chem::MolecularGraph& graph);

struct HBondCounts {
  int donors = 0;
  int acceptors = 0;
};
// Donors: N/O with at least one hydrogen. Acceptors: N/O except aromatic N-H.
HBondCounts h_bond_counts(const chem::MolecularGraph& graph);

// Non-ring single bonds between heavy atoms of heavy degree >= 2, excluding
// the C-N bond of amides (C bearing =O).
int rotatable_bonds(const chem::MolecularGraph& graph);
int ring_count(const chem::MolecularGraph& graph);
// Basis rings whose atoms are all aromatic.
int aromatic_ring_count(const chem::MolecularGraph& graph);
// sp3 carbons over all carbons; 0 when there are no carbons.
double fraction_csp3(const chem::MolecularGraph& graph);
// Atoms other than carbon and hydrogen.
int heteroatom_count(const chem::MolecularGraph& graph);
// Atoms carrying an explicit chirality tag.
int stereo_centers(const chem::MolecularGraph& graph);

// Fragment-contribution polar surface area over N and O atoms, plus S and P
// when requested.
double tpsa(const chem::MolecularGraph& graph, bool include_sulfur_phosphorus = false);

struct CrippenAtomTypes {
  // Per graph atom; hydrogens stored as atoms carry their own H type.
  std::vector<std::string> atom_types;
  // Per graph atom: the type shared by its implicit hydrogens ("" when none).
  std::vector<std::string> implicit_h_types;
  std::vector<std::string> diagnostics;
};
CrippenAtomTypes crippen_atom_types(const chem::MolecularGraph& graph);

// Sum of atom-type logP contributions over all atoms and hydrogens.
double crippen_logp(const chem::MolecularGraph& graph, std::vector<std::string>* diagnostics = nullptr);

// Contribution tables. Parsing validates that every type the typer can emit
// (Crippen) or at least one row per element (polar surface) is present.
class CrippenTable {
 public:
  static CrippenTable parse(std::string_view text);
  static const CrippenTable& builtin();
  double logp(std::string_view type) const;
  const std::map<std::string, double, std::less<>>& entries() const { return logp_; }

 private:
  std::map<std::string, double, std::less<>> logp_;
};

struct TpsaKey {
  int element = 0;
  int charge = 0;
  int hydrogens = 0;
  int single = 0;
  int double_ = 0;
  int triple = 0;
  int aromatic = 0;
  int in_three_ring = -1;  // -1 = either
};

class TpsaTable {
 public:
  static TpsaTable parse(std::string_view text);
  static const TpsaTable& builtin();
  // Contribution for an atom's key; nullopt when no row matches.
  std::optional<double> lookup(const TpsaKey& key) const;
  std::size_t size() const { return rows_.size(); }

 private:
  std::vector<std::pair<TpsaKey, double>> rows_;
};

// Every Crippen type name the typer can assign.
std::span<const std::string_view> crippen_type_names();

}  // namespace molforge::desc
