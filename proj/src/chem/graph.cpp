#include "molforge/chem/graph.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <queue>
#include <string>

#include "molforge/chem/element.hpp"
#include "molforge/chem/smiles.hpp"
#include "molforge/common/error.hpp"

namespace molforge::chem {
namespace {

using BondSet = std::vector<std::uint64_t>;

BondSet empty_set(int bonds) { return BondSet(static_cast<std::size_t>((bonds + 63) / 64), 0); }

void flip(BondSet& set, int bond) { set[static_cast<std::size_t>(bond / 64)] ^= std::uint64_t{1} << (bond % 64); }

bool test(const BondSet& set, int bond) {
  return (set[static_cast<std::size_t>(bond / 64)] >> (bond % 64)) & 1U;
}

// Bridges are exactly the bonds on no cycle.
std::vector<bool> find_ring_bonds(int n_atoms, const std::vector<Bond>& bonds,
                                  const std::vector<std::vector<Neighbor>>& adj) {
  std::vector<bool> in_ring(bonds.size(), true);
  std::vector<int> disc(static_cast<std::size_t>(n_atoms), -1), low(static_cast<std::size_t>(n_atoms), 0);
  int timer = 0;
  struct Frame {
    int atom;
    int parent_bond;
    std::size_t next;
  };
  for (int root = 0; root < n_atoms; ++root) {
    if (disc[static_cast<std::size_t>(root)] >= 0) continue;
    std::vector<Frame> stack{{root, -1, 0}};
    disc[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = timer++;
    while (!stack.empty()) {
      Frame& f = stack.back();
      const auto& nbrs = adj[static_cast<std::size_t>(f.atom)];
      if (f.next < nbrs.size()) {
        const Neighbor nb = nbrs[f.next++];
        if (nb.bond == f.parent_bond) continue;
        auto& d = disc[static_cast<std::size_t>(nb.atom)];
        if (d < 0) {
          d = low[static_cast<std::size_t>(nb.atom)] = timer++;
          stack.push_back({nb.atom, nb.bond, 0});
        } else {
          low[static_cast<std::size_t>(f.atom)] = std::min(low[static_cast<std::size_t>(f.atom)], d);
        }
      } else {
        const Frame done = f;
        stack.pop_back();
        if (!stack.empty()) {
          const int parent = stack.back().atom;
          low[static_cast<std::size_t>(parent)] =
              std::min(low[static_cast<std::size_t>(parent)], low[static_cast<std::size_t>(done.atom)]);
          if (low[static_cast<std::size_t>(done.atom)] > disc[static_cast<std::size_t>(parent)]) {
            in_ring[static_cast<std::size_t>(done.parent_bond)] = false;
          }
        }
      }
    }
  }
  return in_ring;
}

// Walks a simple cycle given by its bond set into a normalized atom list.
std::vector<int> cycle_atoms(const BondSet& set, const std::vector<Bond>& bonds,
                             const std::vector<std::vector<Neighbor>>& adj) {
  int start = -1;
  for (const auto& b : bonds) {
    if (test(set, b.index)) {
      const int lo = std::min(b.begin, b.end);
      if (start < 0 || lo < start) start = lo;
    }
  }
  std::vector<int> ring_nbrs;
  for (const auto& nb : adj[static_cast<std::size_t>(start)]) {
    if (test(set, nb.bond)) ring_nbrs.push_back(nb.atom);
  }
  std::sort(ring_nbrs.begin(), ring_nbrs.end());
  std::vector<int> atoms{start};
  int prev = start;
  int cur = ring_nbrs.front();
  while (cur != start) {
    atoms.push_back(cur);
    int next = -1;
    for (const auto& nb : adj[static_cast<std::size_t>(cur)]) {
      if (test(set, nb.bond) && nb.atom != prev) {
        next = nb.atom;
        break;
      }
    }
    prev = cur;
    cur = next;
  }
  return atoms;
}

// Smallest cycle basis: candidate cycles from shortest-path trees rooted at
// every ring atom (symmetric difference of the two tree paths plus the closing
// bond), shortest first, kept when linearly independent over GF(2). Trees and
// ties between equal-length candidates follow canonical atom ranks, so the
// chosen basis does not depend on input atom order (up to automorphism).
std::vector<std::vector<int>> smallest_cycle_basis(int n_atoms, const std::vector<Bond>& bonds,
                                                   const std::vector<std::vector<Neighbor>>& unsorted_adj,
                                                   int basis_size, const std::vector<int>& ranks) {
  std::vector<std::vector<int>> rings;
  if (basis_size <= 0) return rings;
  const int n_bonds = static_cast<int>(bonds.size());
  auto adj = unsorted_adj;
  for (auto& list : adj) {
    std::sort(list.begin(), list.end(), [&](const Neighbor& x, const Neighbor& y) {
      return ranks[static_cast<std::size_t>(x.atom)] < ranks[static_cast<std::size_t>(y.atom)];
    });
  }
  std::vector<std::pair<int, int>> bond_key(bonds.size());
  for (const auto& b : bonds) {
    const int x = ranks[static_cast<std::size_t>(b.begin)];
    const int y = ranks[static_cast<std::size_t>(b.end)];
    bond_key[static_cast<std::size_t>(b.index)] = {std::min(x, y), std::max(x, y)};
  }
  auto sorted_keys = [&](const BondSet& set) {
    std::vector<std::pair<int, int>> keys;
    for (int b = 0; b < n_bonds; ++b) {
      if (test(set, b)) keys.push_back(bond_key[static_cast<std::size_t>(b)]);
    }
    std::sort(keys.begin(), keys.end());
    return keys;
  };

  std::vector<BondSet> candidates;
  for (int root = 0; root < n_atoms; ++root) {
    bool ring_atom = false;
    for (const auto& nb : adj[static_cast<std::size_t>(root)]) ring_atom |= bonds[static_cast<std::size_t>(nb.bond)].in_ring;
    if (!ring_atom) continue;

    std::vector<int> parent_bond(static_cast<std::size_t>(n_atoms), -2);
    std::vector<int> depth(static_cast<std::size_t>(n_atoms), -1);
    std::queue<int> queue;
    parent_bond[static_cast<std::size_t>(root)] = -1;
    depth[static_cast<std::size_t>(root)] = 0;
    queue.push(root);
    while (!queue.empty()) {
      const int a = queue.front();
      queue.pop();
      for (const auto& nb : adj[static_cast<std::size_t>(a)]) {
        if (!bonds[static_cast<std::size_t>(nb.bond)].in_ring) continue;
        if (depth[static_cast<std::size_t>(nb.atom)] >= 0) continue;
        depth[static_cast<std::size_t>(nb.atom)] = depth[static_cast<std::size_t>(a)] + 1;
        parent_bond[static_cast<std::size_t>(nb.atom)] = nb.bond;
        queue.push(nb.atom);
      }
    }
    auto path_to_root = [&](int a, BondSet& set) {
      while (parent_bond[static_cast<std::size_t>(a)] >= 0) {
        const int b = parent_bond[static_cast<std::size_t>(a)];
        flip(set, b);
        a = bonds[static_cast<std::size_t>(b)].other(a);
      }
    };
    for (const auto& bond : bonds) {
      if (!bond.in_ring) continue;
      if (depth[static_cast<std::size_t>(bond.begin)] < 0 || depth[static_cast<std::size_t>(bond.end)] < 0) continue;
      if (parent_bond[static_cast<std::size_t>(bond.begin)] == bond.index ||
          parent_bond[static_cast<std::size_t>(bond.end)] == bond.index) {
        continue;
      }
      BondSet set = empty_set(n_bonds);
      path_to_root(bond.begin, set);
      path_to_root(bond.end, set);
      flip(set, bond.index);
      candidates.push_back(std::move(set));
    }
  }

  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  std::vector<std::pair<std::vector<std::pair<int, int>>, std::size_t>> order;
  for (std::size_t i = 0; i < candidates.size(); ++i) order.emplace_back(sorted_keys(candidates[i]), i);
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.first.size() != b.first.size()) return a.first.size() < b.first.size();
    return a.first < b.first;
  });

  // Row-reduced independent set, keyed by pivot bond.
  std::vector<std::pair<int, BondSet>> reduced;
  for (const auto& [key, index] : order) {
    const BondSet& cand = candidates[index];
    BondSet v = cand;
    for (const auto& [pivot, row] : reduced) {
      if (test(v, pivot)) {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] ^= row[i];
      }
    }
    int pivot = -1;
    for (int b = 0; b < n_bonds; ++b) {
      if (test(v, b)) {
        pivot = b;
        break;
      }
    }
    if (pivot < 0) continue;
    reduced.emplace_back(pivot, v);
    rings.push_back(cycle_atoms(cand, bonds, adj));
    if (static_cast<int>(rings.size()) == basis_size) break;
  }
  return rings;
}

}  // namespace

std::optional<int> MolecularGraph::bond_between(int a, int b) const {
  for (const auto& nb : neighbors(a)) {
    if (nb.atom == b) return nb.bond;
  }
  return std::nullopt;
}

bool MolecularGraph::atom_in_ring(int atom) const { return ring_membership(atom) > 0; }

int MolecularGraph::total_h(int atom) const {
  int n = implicit_h(atom);
  for (const auto& nb : neighbors(atom)) {
    if (atoms_[static_cast<std::size_t>(nb.atom)].element == 1) ++n;
  }
  return n;
}

int MolecularGraph::heavy_degree(int atom) const {
  int n = 0;
  for (const auto& nb : neighbors(atom)) {
    if (atoms_[static_cast<std::size_t>(nb.atom)].element != 1) ++n;
  }
  return n;
}

int GraphBuilder::add_atom(Atom atom) {
  element(atom.element);  // validates the atomic number
  atom.index = static_cast<int>(atoms_.size());
  atoms_.push_back(std::move(atom));
  return atoms_.back().index;
}

std::optional<int> GraphBuilder::bond_between(int a, int b) const {
  for (const auto& bond : bonds_) {
    if ((bond.begin == a && bond.end == b) || (bond.begin == b && bond.end == a)) return bond.index;
  }
  return std::nullopt;
}

int GraphBuilder::add_bond(int a, int b, BondOrder order) {
  const int n = static_cast<int>(atoms_.size());
  if (a < 0 || b < 0 || a >= n || b >= n) throw ArgumentError("bond endpoint out of range");
  if (a == b) throw ArgumentError("bond endpoints must be distinct");
  if (bond_between(a, b)) {
    throw ArgumentError("duplicate bond between atoms " + std::to_string(a) + " and " + std::to_string(b));
  }
  Bond bond;
  bond.begin = a;
  bond.end = b;
  bond.order = order;
  bond.index = static_cast<int>(bonds_.size());
  bonds_.push_back(bond);
  return bond.index;
}

MolecularGraph GraphBuilder::build(std::string source_text) && {
  MolecularGraph g;
  const int n = static_cast<int>(atoms_.size());
  g.atoms_ = std::move(atoms_);
  g.bonds_ = std::move(bonds_);
  g.source_text_ = std::move(source_text);
  g.adjacency_.assign(static_cast<std::size_t>(n), {});
  for (const auto& b : g.bonds_) {
    g.adjacency_[static_cast<std::size_t>(b.begin)].push_back({b.end, b.index});
    g.adjacency_[static_cast<std::size_t>(b.end)].push_back({b.begin, b.index});
  }

  g.component_.assign(static_cast<std::size_t>(n), -1);
  for (int start = 0; start < n; ++start) {
    if (g.component_[static_cast<std::size_t>(start)] >= 0) continue;
    const int id = g.component_count_++;
    std::vector<int> stack{start};
    g.component_[static_cast<std::size_t>(start)] = id;
    while (!stack.empty()) {
      const int a = stack.back();
      stack.pop_back();
      for (const auto& nb : g.adjacency_[static_cast<std::size_t>(a)]) {
        if (g.component_[static_cast<std::size_t>(nb.atom)] < 0) {
          g.component_[static_cast<std::size_t>(nb.atom)] = id;
          stack.push_back(nb.atom);
        }
      }
    }
  }

  const auto in_ring = find_ring_bonds(n, g.bonds_, g.adjacency_);
  for (auto& b : g.bonds_) {
    b.in_ring = in_ring[static_cast<std::size_t>(b.index)];
    // Aromatic bonds only exist inside rings; a link between two aromatic
    // systems (biphenyl) is a single bond.
    if (!b.in_ring && b.order == BondOrder::aromatic) b.order = BondOrder::single;
  }

  g.implicit_h_.assign(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    const Atom& atom = g.atoms_[static_cast<std::size_t>(i)];
    if (atom.explicit_h) {
      g.implicit_h_[static_cast<std::size_t>(i)] = *atom.explicit_h;
      continue;
    }
    const auto h = default_hydrogens(g, i);
    if (!h) {
      g.warnings_.push_back({0,
                             "valence overflow on atom " + std::to_string(i) + " (" +
                                 std::string(element(atom.element).symbol) + ", bond-order sum " +
                                 std::to_string(bond_order_sum(g, i)) + ")",
                             Severity::warning});
    }
    g.implicit_h_[static_cast<std::size_t>(i)] = h.value_or(0);
  }

  // Canonical ranks only need the in-ring flag, stored as a provisional
  // membership count until the basis is known.
  g.ring_membership_.assign(static_cast<std::size_t>(n), 0);
  for (const auto& b : g.bonds_) {
    if (!b.in_ring) continue;
    g.ring_membership_[static_cast<std::size_t>(b.begin)] = 1;
    g.ring_membership_[static_cast<std::size_t>(b.end)] = 1;
  }
  const int basis_size = g.bond_count() - n + g.component_count_;
  if (basis_size > 0) {
    g.rings_ = smallest_cycle_basis(n, g.bonds_, g.adjacency_, basis_size, canonical_ranks(g));
  }
  g.ring_membership_.assign(static_cast<std::size_t>(n), 0);
  for (const auto& ring : g.rings_) {
    for (int a : ring) ++g.ring_membership_[static_cast<std::size_t>(a)];
  }
  return g;
}

int bond_order_sum(const MolecularGraph& graph, int atom) {
  int twice_sum = 0;
  for (const auto& nb : graph.neighbors(atom)) twice_sum += twice_valence(graph.bond(nb.bond).order);
  return twice_sum / 2;
}

std::optional<int> default_hydrogens(const MolecularGraph& graph, int atom) {
  const Atom& a = graph.atom(atom);
  const auto valences = element(a.element).valences;
  if (valences.empty()) return 0;
  const int sum = bond_order_sum(graph, atom);
  if (a.aromatic) return std::max(0, valences.front() - sum);
  for (int v : valences) {
    if (v >= sum) return v - sum;
  }
  return std::nullopt;
}

int implicit_hydrogens(const MolecularGraph& graph, int atom) {
  if (atom < 0 || atom >= graph.atom_count()) throw ArgumentError("atom index out of range");
  return graph.implicit_h(atom);
}

MolecularGraph relabel(const MolecularGraph& graph, std::span<const int> perm) {
  const int n = graph.atom_count();
  if (static_cast<int>(perm.size()) != n) throw ArgumentError("permutation size mismatch");
  std::vector<int> inverse(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    const int p = perm[static_cast<std::size_t>(i)];
    if (p < 0 || p >= n || inverse[static_cast<std::size_t>(p)] >= 0) throw ArgumentError("not a permutation");
    inverse[static_cast<std::size_t>(p)] = i;
  }
  GraphBuilder builder;
  for (int newi = 0; newi < n; ++newi) {
    Atom atom = graph.atom(inverse[static_cast<std::size_t>(newi)]);
    for (int& r : atom.stereo_refs) {
      if (r != kImplicitHydrogen) r = perm[static_cast<std::size_t>(r)];
    }
    builder.add_atom(std::move(atom));
  }
  std::vector<std::pair<std::pair<int, int>, BondOrder>> bonds;
  for (const auto& b : graph.bonds()) {
    const int a = perm[static_cast<std::size_t>(b.begin)];
    const int c = perm[static_cast<std::size_t>(b.end)];
    bonds.push_back({{std::min(a, c), std::max(a, c)}, b.order});
  }
  std::sort(bonds.begin(), bonds.end());
  for (const auto& [ends, order] : bonds) builder.add_bond(ends.first, ends.second, order);
  return std::move(builder).build(graph.source_text());
}

MolecularGraph strip_stereo(const MolecularGraph& graph) {
  GraphBuilder builder;
  for (const auto& a : graph.atoms()) {
    Atom atom = a;
    atom.chirality = Chirality::none;
    atom.stereo_refs.clear();
    builder.add_atom(std::move(atom));
  }
  for (const auto& b : graph.bonds()) builder.add_bond(b.begin, b.end, b.order);
  return std::move(builder).build(graph.source_text());
}

}  // namespace molforge::chem
