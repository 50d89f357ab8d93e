#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <string>
#include <tuple>

#include "molforge/chem/element.hpp"
#include "molforge/chem/smiles.hpp"

namespace molforge::chem {
namespace {

using Key = std::vector<std::int64_t>;

// Dense ranks (0..k-1) for atoms ordered by key; equal keys share a rank.
std::vector<int> dense_ranks(const std::vector<Key>& keys) {
  const std::size_t n = keys.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return keys[a] < keys[b]; });
  std::vector<int> ranks(n, 0);
  int rank = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && keys[order[i]] != keys[order[i - 1]]) ++rank;
    ranks[static_cast<std::size_t>(order[i])] = rank;
  }
  return ranks;
}

int class_count(const std::vector<int>& ranks) {
  return ranks.empty() ? 0 : *std::max_element(ranks.begin(), ranks.end()) + 1;
}

std::vector<int> refine(const MolecularGraph& g, std::vector<int> ranks) {
  const int n = g.atom_count();
  int classes = class_count(ranks);
  while (true) {
    std::vector<Key> keys(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
      Key& key = keys[static_cast<std::size_t>(a)];
      key.push_back(ranks[static_cast<std::size_t>(a)]);
      std::vector<std::int64_t> env;
      for (const auto& nb : g.neighbors(a)) {
        env.push_back(std::int64_t{ranks[static_cast<std::size_t>(nb.atom)]} * 8 +
                      static_cast<int>(g.bond(nb.bond).order));
      }
      std::sort(env.begin(), env.end());
      key.insert(key.end(), env.begin(), env.end());
    }
    auto next = dense_ranks(keys);
    const int next_classes = class_count(next);
    ranks = std::move(next);
    if (next_classes == classes) return ranks;
    classes = next_classes;
  }
}

std::vector<int> initial_classes(const MolecularGraph& g) {
  std::vector<Key> keys;
  keys.reserve(static_cast<std::size_t>(g.atom_count()));
  for (const auto& a : g.atoms()) {
    keys.push_back({a.element, a.isotope.value_or(0), g.degree(a.index), g.total_h(a.index), a.formal_charge,
                    a.aromatic ? 1 : 0, g.atom_in_ring(a.index) ? 1 : 0, a.chirality == Chirality::none ? 0 : 1});
  }
  return dense_ranks(keys);
}

bool organic_subset(const Atom& a) {
  switch (a.element) {
    case 5: case 6: case 7: case 8: case 15: case 16:
      return true;
    case 9: case 17: case 35: case 53:
      return !a.aromatic;
    default:
      return false;
  }
}

std::string atom_symbol(const Atom& a) {
  std::string sym(element(a.element).symbol);
  if (a.aromatic) sym[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(sym[0])));
  return sym;
}

std::string ring_label(int digit) { return digit < 10 ? std::to_string(digit) : "%" + std::to_string(digit); }

// Parity of the permutation taking `from` onto `to` (same elements).
bool odd_permutation(std::vector<int> from, const std::vector<int>& to) {
  bool odd = false;
  for (std::size_t i = 0; i < to.size(); ++i) {
    if (from[i] == to[i]) continue;
    const auto j = static_cast<std::size_t>(std::find(from.begin() + static_cast<long>(i), from.end(), to[i]) - from.begin());
    std::swap(from[i], from[j]);
    odd = !odd;
  }
  return odd;
}

class Writer {
 public:
  explicit Writer(const MolecularGraph& g) : g_(g), ranks_(canonical_ranks(g)) {
    const auto n = static_cast<std::size_t>(g.atom_count());
    sorted_nbrs_.resize(n);
    for (int a = 0; a < g.atom_count(); ++a) {
      auto& list = sorted_nbrs_[static_cast<std::size_t>(a)];
      list.assign(g.neighbors(a).begin(), g.neighbors(a).end());
      std::sort(list.begin(), list.end(),
                [&](const Neighbor& x, const Neighbor& y) { return rank(x.atom) < rank(y.atom); });
    }
    visited_.assign(n, false);
    parent_.assign(n, -1);
    parent_bond_.assign(n, -1);
    children_.resize(n);
    closures_.resize(n);
    closure_open_.assign(static_cast<std::size_t>(g.bond_count()), false);
  }

  std::string run() {
    const int n = g_.atom_count();
    std::vector<int> starts;
    for (int c = 0; c < g_.component_count(); ++c) {
      int best = -1;
      for (int a = 0; a < n; ++a) {
        if (g_.component_of(a) == c && (best < 0 || rank(a) < rank(best))) best = a;
      }
      starts.push_back(best);
    }
    std::sort(starts.begin(), starts.end(), [&](int a, int b) { return rank(a) < rank(b); });
    std::string out;
    for (int start : starts) {
      build_tree(start);
      if (!out.empty()) out += '.';
      emit(start, -1, out);
    }
    return out;
  }

 private:
  int rank(int a) const { return ranks_[static_cast<std::size_t>(a)]; }

  void build_tree(int root) {
    // Iterative DFS; a non-tree edge always reaches an ancestor, which opens it.
    struct Frame {
      int atom;
      std::size_t next;
    };
    std::vector<Frame> stack{{root, 0}};
    visited_[static_cast<std::size_t>(root)] = true;
    while (!stack.empty()) {
      Frame& f = stack.back();
      const auto& nbrs = sorted_nbrs_[static_cast<std::size_t>(f.atom)];
      if (f.next == nbrs.size()) {
        stack.pop_back();
        continue;
      }
      const Neighbor nb = nbrs[f.next++];
      const int a = f.atom;
      if (nb.bond == parent_bond(a)) continue;
      if (!visited_[static_cast<std::size_t>(nb.atom)]) {
        visited_[static_cast<std::size_t>(nb.atom)] = true;
        parent_[static_cast<std::size_t>(nb.atom)] = a;
        parent_bond_[static_cast<std::size_t>(nb.atom)] = nb.bond;
        children_[static_cast<std::size_t>(a)].push_back(nb);
        stack.push_back({nb.atom, 0});
      } else if (!closure_open_[static_cast<std::size_t>(nb.bond)]) {
        closure_open_[static_cast<std::size_t>(nb.bond)] = true;
        // nb.atom is an ancestor: it opens, `a` closes.
        closures_[static_cast<std::size_t>(nb.atom)].push_back({a, nb.bond, true});
        closures_[static_cast<std::size_t>(a)].push_back({nb.atom, nb.bond, false});
      }
    }
  }

  int parent_bond(int a) const { return parent_bond_[static_cast<std::size_t>(a)]; }

  std::string bond_symbol(const Bond& b) const {
    const bool both_aromatic = g_.atom(b.begin).aromatic && g_.atom(b.end).aromatic;
    switch (b.order) {
      case BondOrder::single: return both_aromatic ? "-" : "";
      case BondOrder::double_: return "=";
      case BondOrder::triple: return "#";
      case BondOrder::aromatic: return both_aromatic ? "" : ":";
    }
    return "";
  }

  std::string atom_text(int a, const std::vector<int>& emitted_order) const {
    const Atom& atom = g_.atom(a);
    const int h = g_.implicit_h(a);
    const auto model_h = default_hydrogens(g_, a);
    const bool bare = organic_subset(atom) && atom.formal_charge == 0 && !atom.isotope &&
                      atom.chirality == Chirality::none && model_h && *model_h == h;
    if (bare) return atom_symbol(atom);
    std::string s = "[";
    if (atom.isotope) s += std::to_string(*atom.isotope);
    s += atom_symbol(atom);
    if (atom.chirality != Chirality::none) {
      Chirality tag = atom.chirality;
      if (odd_permutation(atom.stereo_refs, emitted_order)) {
        tag = tag == Chirality::clockwise ? Chirality::counterclockwise : Chirality::clockwise;
      }
      s += tag == Chirality::clockwise ? "@@" : "@";
    }
    if (h > 0) s += h == 1 ? "H" : "H" + std::to_string(h);
    if (atom.formal_charge != 0) {
      s += atom.formal_charge > 0 ? '+' : '-';
      const int mag = std::abs(atom.formal_charge);
      if (mag > 1) s += std::to_string(mag);
    }
    return s + "]";
  }

  void emit(int a, int from_bond, std::string& out) {
    // Ring closure digits: closings keep their digit reserved until this
    // atom's openings have been assigned.
    auto& events = closures_[static_cast<std::size_t>(a)];
    std::stable_sort(events.begin(), events.end(), [&](const Closure& x, const Closure& y) {
      if (x.opens != y.opens) return !x.opens;
      if (!x.opens) return digit_of_bond_.at(x.bond) < digit_of_bond_.at(y.bond);
      return rank(x.partner) < rank(y.partner);
    });
    std::string ring_text;
    std::vector<int> freed;
    for (const auto& ev : events) {
      if (!ev.opens) {
        const int digit = digit_of_bond_.at(ev.bond);
        ring_text += ring_label(digit);
        freed.push_back(digit);
      } else {
        int digit = 1;
        while (digit_in_use(digit)) ++digit;
        digits_in_use_.push_back(digit);
        digit_of_bond_[ev.bond] = digit;
        ring_text += bond_symbol(g_.bond(ev.bond)) + ring_label(digit);
      }
    }
    for (int d : freed) digits_in_use_.erase(std::find(digits_in_use_.begin(), digits_in_use_.end(), d));

    std::vector<int> order;
    const Atom& atom = g_.atom(a);
    if (atom.chirality != Chirality::none) {
      if (from_bond >= 0) order.push_back(parent_[static_cast<std::size_t>(a)]);
      if (std::find(atom.stereo_refs.begin(), atom.stereo_refs.end(), kImplicitHydrogen) != atom.stereo_refs.end()) {
        order.push_back(kImplicitHydrogen);
      }
      for (const auto& ev : events) order.push_back(ev.partner);
      for (const auto& c : children_[static_cast<std::size_t>(a)]) order.push_back(c.atom);
      auto sorted_refs = atom.stereo_refs;
      auto sorted_order = order;
      std::sort(sorted_refs.begin(), sorted_refs.end());
      std::sort(sorted_order.begin(), sorted_order.end());
      if (sorted_refs != sorted_order) order.clear();
    }
    if (atom.chirality != Chirality::none && order.empty()) {
      // Stereo references do not describe this atom's neighbors; drop the tag.
      out += bare_or_bracket_without_stereo(a);
    } else {
      out += atom_text(a, order);
    }
    out += ring_text;

    const auto& kids = children_[static_cast<std::size_t>(a)];
    for (std::size_t i = 0; i < kids.size(); ++i) {
      const bool branch = i + 1 < kids.size();
      if (branch) out += '(';
      out += bond_symbol(g_.bond(kids[i].bond));
      emit(kids[i].atom, kids[i].bond, out);
      if (branch) out += ')';
    }
  }

  std::string bare_or_bracket_without_stereo(int a) const {
    const Atom& atom = g_.atom(a);
    std::string s = "[";
    if (atom.isotope) s += std::to_string(*atom.isotope);
    s += atom_symbol(atom);
    const int h = g_.implicit_h(a);
    if (h > 0) s += h == 1 ? "H" : "H" + std::to_string(h);
    if (atom.formal_charge != 0) {
      s += atom.formal_charge > 0 ? '+' : '-';
      if (std::abs(atom.formal_charge) > 1) s += std::to_string(std::abs(atom.formal_charge));
    }
    return s + "]";
  }

  bool digit_in_use(int d) const { return std::find(digits_in_use_.begin(), digits_in_use_.end(), d) != digits_in_use_.end(); }

  struct Closure {
    int partner;
    int bond;
    bool opens;
  };

  const MolecularGraph& g_;
  std::vector<int> ranks_;
  std::vector<std::vector<Neighbor>> sorted_nbrs_;
  std::vector<bool> visited_;
  std::vector<int> parent_;
  std::vector<int> parent_bond_;
  std::vector<std::vector<Neighbor>> children_;
  std::vector<std::vector<Closure>> closures_;
  std::vector<bool> closure_open_;
  std::vector<int> digits_in_use_;
  std::map<int, int> digit_of_bond_;
};

}  // namespace

std::vector<int> refined_invariant_classes(const MolecularGraph& graph) {
  return refine(graph, initial_classes(graph));
}

std::vector<int> canonical_ranks(const MolecularGraph& graph) {
  auto ranks = refined_invariant_classes(graph);
  const int n = graph.atom_count();
  while (class_count(ranks) < n) {
    std::vector<int> size(static_cast<std::size_t>(n), 0);
    for (int r : ranks) ++size[static_cast<std::size_t>(r)];
    int tied = 0;
    while (size[static_cast<std::size_t>(tied)] < 2) ++tied;
    int chosen = -1;
    for (int a = 0; a < n && chosen < 0; ++a) {
      if (ranks[static_cast<std::size_t>(a)] == tied) chosen = a;
    }
    for (int a = 0; a < n; ++a) {
      int& r = ranks[static_cast<std::size_t>(a)];
      r = 2 * r + (r == tied && a != chosen ? 1 : 0);
    }
    std::vector<Key> keys;
    for (int r : ranks) keys.push_back({r});
    ranks = refine(graph, dense_ranks(keys));
  }
  return ranks;
}

std::string write_smiles(const MolecularGraph& graph) {
  if (graph.atom_count() == 0) return {};
  return Writer(graph).run();
}

std::string canonical_smiles(std::string_view text) { return write_smiles(parse_smiles(text)); }

}  // namespace molforge::chem
