#include "molforge/desc/descriptors.hpp"

#include <algorithm>

#include "molforge/chem/element.hpp"
#include "molforge/chem/smiles.hpp"

namespace molforge::desc {
namespace {

using chem::BondOrder;
using chem::MolecularGraph;

constexpr double kHydrogenMass = 1.008;

std::vector<DescriptorSpec> build_catalog() {
  using K = DescriptorKind;
  std::vector<DescriptorSpec> specs = {
      {"MolWt", K::real, "g/mol"},
      {"HeavyAtomCount", K::integer, "atoms"},
      {"NumHDonors", K::integer, "atoms"},
      {"NumHAcceptors", K::integer, "atoms"},
      {"TPSA", K::real, "angstrom^2"},
      {"MolLogP", K::real, "log units"},
      {"NumRotatableBonds", K::integer, "bonds"},
      {"RingCount", K::integer, "rings"},
      {"NumAromaticRings", K::integer, "rings"},
      {"FractionCSP3", K::real, "fraction"},
      {"NumHeteroatoms", K::integer, "atoms"},
      {"NumAtomStereoCenters", K::integer, "atoms"},
  };
  for (const auto* entry : pattern::PatternLibrary::builtin().in_list(pattern::ListId::fragment)) {
    specs.push_back({entry->name, K::integer, "matches"});
  }
  return specs;
}

bool has_double_to_oxygen(const MolecularGraph& graph, int atom) {
  for (const auto& nb : graph.neighbors(atom)) {
    if (graph.bond(nb.bond).order == BondOrder::double_ && graph.atom(nb.atom).element == 8) return true;
  }
  return false;
}

bool is_amide_bond(const MolecularGraph& graph, int a, int b) {
  const auto is_carbonyl_c = [&](int x) { return graph.atom(x).element == 6 && has_double_to_oxygen(graph, x); };
  const int za = graph.atom(a).element;
  const int zb = graph.atom(b).element;
  return (za == 6 && zb == 7 && is_carbonyl_c(a)) || (za == 7 && zb == 6 && is_carbonyl_c(b));
}

double scalar_value(const MolecularGraph& graph, std::string_view name, std::vector<std::string>& diagnostics) {
  if (name == "MolWt") return mol_weight(graph);
  if (name == "HeavyAtomCount") return heavy_atom_count(graph);
  if (name == "NumHDonors") return h_bond_counts(graph).donors;
  if (name == "NumHAcceptors") return h_bond_counts(graph).acceptors;
  if (name == "TPSA") return tpsa(graph);
  if (name == "MolLogP") return crippen_logp(graph, &diagnostics);
  if (name == "NumRotatableBonds") return rotatable_bonds(graph);
  if (name == "RingCount") return ring_count(graph);
  if (name == "NumAromaticRings") return aromatic_ring_count(graph);
  if (name == "FractionCSP3") return fraction_csp3(graph);
  if (name == "NumHeteroatoms") return heteroatom_count(graph);
  if (name == "NumAtomStereoCenters") return stereo_centers(graph);
  throw ArgumentError("no scalar descriptor named " + std::string(name));
}

}  // namespace

const std::vector<DescriptorSpec>& descriptor_catalog() {
  static const std::vector<DescriptorSpec> kCatalog = build_catalog();
  return kCatalog;
}

const DescriptorSpec& descriptor_spec(std::string_view name) {
  const auto& catalog = descriptor_catalog();
  const auto it = std::find_if(catalog.begin(), catalog.end(), [&](const auto& s) { return s.name == name; });
  if (it != catalog.end()) return *it;
  std::string valid;
  for (const auto& s : catalog) {
    if (!valid.empty()) valid += ", ";
    valid += s.name;
  }
  throw ArgumentError("unknown descriptor '" + std::string(name) + "'; valid names: " + valid);
}

std::vector<DescriptorSpec> descriptor_specs(std::span<const std::string> names) {
  std::vector<DescriptorSpec> specs;
  specs.reserve(names.size());
  for (const auto& name : names) specs.push_back(descriptor_spec(name));
  return specs;
}

DescriptorVector compute_descriptors(const MolecularGraph& graph, std::span<const DescriptorSpec> specs) {
  DescriptorVector out;
  out.molecule = chem::write_smiles(graph);
  const auto& library = pattern::PatternLibrary::builtin();
  for (const auto& spec : specs) {
    const DescriptorSpec& known = descriptor_spec(spec.name);
    double value = 0;
    if (known.name.starts_with("fr_")) {
      value = pattern::count_unique_matches(graph, library.find(known.name)->pattern);
    } else {
      value = scalar_value(graph, known.name, out.diagnostics);
    }
    out.values[known.name] = value;
  }
  return out;
}

double mol_weight(const MolecularGraph& graph) {
  double total = 0;
  for (int a = 0; a < graph.atom_count(); ++a) {
    const auto& atom = graph.atom(a);
    total += atom.isotope ? chem::isotope_mass(atom.element, *atom.isotope) : chem::element(atom.element).mass;
    total += graph.implicit_h(a) * kHydrogenMass;
  }
  return total;
}

int heavy_atom_count(const MolecularGraph& graph) {
  int count = 0;
  for (const auto& atom : graph.atoms()) count += atom.element != 1;
  return count;
}

HBondCounts h_bond_counts(const MolecularGraph& graph) {
  HBondCounts counts;
  for (int a = 0; a < graph.atom_count(); ++a) {
    const auto& atom = graph.atom(a);
    if (atom.element != 7 && atom.element != 8) continue;
    const int h = graph.total_h(a);
    if (h > 0) ++counts.donors;
    if (!(atom.element == 7 && atom.aromatic && h > 0)) ++counts.acceptors;
  }
  return counts;
}

int rotatable_bonds(const MolecularGraph& graph) {
  int count = 0;
  for (const auto& bond : graph.bonds()) {
    if (bond.in_ring || bond.order != BondOrder::single) continue;
    if (graph.atom(bond.begin).element == 1 || graph.atom(bond.end).element == 1) continue;
    if (graph.heavy_degree(bond.begin) < 2 || graph.heavy_degree(bond.end) < 2) continue;
    if (is_amide_bond(graph, bond.begin, bond.end)) continue;
    ++count;
  }
  return count;
}

int ring_count(const MolecularGraph& graph) { return static_cast<int>(graph.rings().size()); }

int aromatic_ring_count(const MolecularGraph& graph) {
  return static_cast<int>(std::count_if(graph.rings().begin(), graph.rings().end(), [&](const auto& ring) {
    return std::all_of(ring.begin(), ring.end(), [&](int a) { return graph.atom(a).aromatic; });
  }));
}

double fraction_csp3(const MolecularGraph& graph) {
  int carbons = 0;
  int sp3 = 0;
  for (int a = 0; a < graph.atom_count(); ++a) {
    const auto& atom = graph.atom(a);
    if (atom.element != 6) continue;
    ++carbons;
    if (atom.aromatic) continue;
    const auto nbrs = graph.neighbors(a);
    sp3 += std::all_of(nbrs.begin(), nbrs.end(),
                       [&](const auto& nb) { return graph.bond(nb.bond).order == BondOrder::single; });
  }
  return carbons == 0 ? 0.0 : static_cast<double>(sp3) / carbons;
}

int heteroatom_count(const MolecularGraph& graph) {
  int count = 0;
  for (const auto& atom : graph.atoms()) count += atom.element != 6 && atom.element != 1;
  return count;
}

int stereo_centers(const MolecularGraph& graph) {
  int count = 0;
  for (const auto& atom : graph.atoms()) count += atom.chirality != chem::Chirality::none;
  return count;
}

}  // namespace molforge::desc
