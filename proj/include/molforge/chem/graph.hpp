#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace molforge::chem {

// @ is counterclockwise, @@ is clockwise, looking from the first reference
// neighbor toward the center.
enum class Chirality : std::uint8_t { none, clockwise, counterclockwise };

enum class BondOrder : std::uint8_t { single = 1, double_ = 2, triple = 3, aromatic = 4 };

// Twice the bond's valence contribution (aromatic counts 1.5).
constexpr int twice_valence(BondOrder order) {
  switch (order) {
    case BondOrder::single: return 2;
    case BondOrder::double_: return 4;
    case BondOrder::triple: return 6;
    case BondOrder::aromatic: return 3;
  }
  return 0;
}

// Placeholder inside Atom::stereo_refs for the atom's own implicit hydrogen.
constexpr int kImplicitHydrogen = -1;

struct Atom {
  int element = 6;
  int formal_charge = 0;
  std::optional<int> isotope;
  std::optional<int> explicit_h;  // set for bracket atoms only
  bool aromatic = false;
  Chirality chirality = Chirality::none;
  // Neighbor order the chirality tag refers to; may contain kImplicitHydrogen.
  std::vector<int> stereo_refs;
  int index = 0;
};

struct Bond {
  int begin = 0;
  int end = 0;
  BondOrder order = BondOrder::single;
  bool in_ring = false;
  int index = 0;

  int other(int atom) const { return atom == begin ? end : begin; }
};

struct Neighbor {
  int atom;
  int bond;
};

enum class Severity : std::uint8_t { error, warning };

struct ParseDiagnostics {
  std::size_t position = 0;
  std::string message;
  Severity severity = Severity::error;
};

// Immutable molecule. Construct through GraphBuilder (or parse_smiles).
class MolecularGraph {
 public:
  MolecularGraph() = default;

  std::span<const Atom> atoms() const { return atoms_; }
  std::span<const Bond> bonds() const { return bonds_; }
  const Atom& atom(int i) const { return atoms_[static_cast<std::size_t>(i)]; }
  const Bond& bond(int i) const { return bonds_[static_cast<std::size_t>(i)]; }
  int atom_count() const { return static_cast<int>(atoms_.size()); }
  int bond_count() const { return static_cast<int>(bonds_.size()); }

  // Neighbors in bond-creation order.
  std::span<const Neighbor> neighbors(int atom) const { return adjacency_[static_cast<std::size_t>(atom)]; }
  std::optional<int> bond_between(int a, int b) const;

  // Smallest cycle basis; each ring is an atom cycle starting at its lowest
  // index and walking toward the lower-indexed of that atom's two ring neighbors.
  const std::vector<std::vector<int>>& rings() const { return rings_; }
  bool atom_in_ring(int atom) const;
  int ring_membership(int atom) const { return ring_membership_[static_cast<std::size_t>(atom)]; }

  // Connected component id per atom, numbered by lowest member index.
  int component_of(int atom) const { return component_[static_cast<std::size_t>(atom)]; }
  int component_count() const { return component_count_; }

  int implicit_h(int atom) const { return implicit_h_[static_cast<std::size_t>(atom)]; }
  // Implicit hydrogens plus explicit hydrogen-atom neighbors.
  int total_h(int atom) const;
  int degree(int atom) const { return static_cast<int>(neighbors(atom).size()); }
  // Neighbors that are not hydrogen atoms.
  int heavy_degree(int atom) const;

  const std::string& source_text() const { return source_text_; }
  const std::vector<ParseDiagnostics>& warnings() const { return warnings_; }

 private:
  friend class GraphBuilder;

  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<std::vector<int>> rings_;
  std::vector<int> ring_membership_;
  std::vector<int> component_;
  int component_count_ = 0;
  std::vector<int> implicit_h_;
  std::string source_text_;
  std::vector<ParseDiagnostics> warnings_;
};

class GraphBuilder {
 public:
  int add_atom(Atom atom);
  // Throws ArgumentError for self-loops, bad indices and duplicate pairs.
  int add_bond(int a, int b, BondOrder order);
  std::optional<int> bond_between(int a, int b) const;
  Atom& atom(int i) { return atoms_[static_cast<std::size_t>(i)]; }
  int atom_count() const { return static_cast<int>(atoms_.size()); }

  // Perceives rings, components and implicit hydrogens.
  MolecularGraph build(std::string source_text = {}) &&;

 private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
};

// Implicit hydrogen count under the valence model: bracket atoms report their
// written count; organic-subset atoms take the smallest standard valence at or
// above the bond-order sum (aromatic bonds 1.5 each, floored after summing).
// Aromatic atoms only consider their lowest valence. Overflow yields 0.
int implicit_hydrogens(const MolecularGraph& graph, int atom);

// Bond-order sum with aromatic bonds at 1.5, floored after summing.
int bond_order_sum(const MolecularGraph& graph, int atom);

// Hydrogens the valence model assigns an organic-subset atom with this
// bonding, ignoring any bracket count; nullopt on non-aromatic overflow.
// Elements without a valence list get 0.
std::optional<int> default_hydrogens(const MolecularGraph& graph, int atom);

// Copy with atom i moved to position perm[i]; bonds are re-emitted in an
// order derived from the new indices.
MolecularGraph relabel(const MolecularGraph& graph, std::span<const int> perm);

// Drops every chirality tag.
MolecularGraph strip_stereo(const MolecularGraph& graph);

}  // namespace molforge::chem
