#include "molforge/chem/molgen.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <numeric>
#include <string_view>

#include "molforge/chem/smiles.hpp"

namespace molforge::chem {
namespace {

struct RingTemplate {
  std::string_view name;
  std::vector<int> elements;   // ring order
  std::vector<bool> nh;        // bracket [nH]
};

const std::vector<RingTemplate>& ring_templates() {
  static const std::vector<RingTemplate> kTemplates = {
      {"benzene", {6, 6, 6, 6, 6, 6}, {}},
      {"pyridine", {7, 6, 6, 6, 6, 6}, {}},
      {"pyrimidine", {7, 6, 7, 6, 6, 6}, {}},
      {"pyrrole", {7, 6, 6, 6, 6}, {true, false, false, false, false}},
      {"furan", {8, 6, 6, 6, 6}, {}},
      {"thiophene", {16, 6, 6, 6, 6}, {}},
      {"imidazole", {7, 6, 7, 6, 6}, {true, false, false, false, false}},
  };
  return kTemplates;
}

int max_valence(int element) {
  switch (element) {
    case 6: return 4;
    case 7: return 3;
    case 8: case 16: return 2;
    default: return 1;
  }
}

class Assembler {
 public:
  Assembler(Rng& rng, const MolGenConfig& config) : rng_(rng), config_(config) {}

  void grow(int target) {
    const int first = size();
    if (rng_.bernoulli(config_.aromatic_ring_prob) && target - size() >= 5) {
      add_ring(-1);
    } else {
      add_atom(pick_element());
    }
    while (size() < target) {
      std::vector<int> open;
      for (int i = first; i < size(); ++i) {
        if (free_[static_cast<std::size_t>(i)] > 0) open.push_back(i);
      }
      if (open.empty()) break;
      const int anchor = open[rng_.uniform_index(open.size())];
      if (rng_.bernoulli(config_.aromatic_ring_prob * 0.25) && target - size() >= 6) {
        add_ring(anchor);
        continue;
      }
      const int element = pick_element();
      const int cap = std::min(free_[static_cast<std::size_t>(anchor)], max_valence(element));
      int order = 1;
      if (!atoms_[static_cast<std::size_t>(anchor)].aromatic && cap >= 2 && rng_.bernoulli(config_.multiple_bond_prob)) {
        order = (cap >= 3 && element != 8 && element != 16 && rng_.bernoulli(0.3)) ? 3 : 2;
      }
      const int atom = add_atom(element);
      connect(anchor, atom, order == 1 ? BondOrder::single : order == 2 ? BondOrder::double_ : BondOrder::triple);
      if (rng_.bernoulli(config_.ring_closure_prob)) close_ring(first);
    }
  }

  void decorate() {
    for (int i = 0; i < size(); ++i) {
      Atom& a = atoms_[static_cast<std::size_t>(i)];
      if (a.aromatic || a.explicit_h) continue;
      const int nbonds = static_cast<int>(adj_[static_cast<std::size_t>(i)].size());
      if (a.element == 7 && nbonds == 1 && free_[static_cast<std::size_t>(i)] == 2 && rng_.bernoulli(config_.charge_prob * 4)) {
        a.formal_charge = 1;
        a.explicit_h = 3;
      } else if (a.element == 8 && nbonds == 1 && free_[static_cast<std::size_t>(i)] == 1 && rng_.bernoulli(config_.charge_prob * 2)) {
        a.formal_charge = -1;
        a.explicit_h = 0;
      } else if (a.element == 6 && rng_.bernoulli(config_.isotope_prob)) {
        a.isotope = 13;
        a.explicit_h = free_[static_cast<std::size_t>(i)];
      }
    }
  }

  MolecularGraph build(bool with_stereo) {
    GraphBuilder builder;
    for (const auto& a : atoms_) builder.add_atom(a);
    for (const auto& [a, b, order] : bonds_) builder.add_bond(a, b, order);
    MolecularGraph g = std::move(builder).build();
    if (!with_stereo) return g;

    const auto classes = refined_invariant_classes(g);
    std::vector<int> class_size(static_cast<std::size_t>(g.atom_count()), 0);
    for (int c : classes) ++class_size[static_cast<std::size_t>(c)];
    bool any = false;
    for (int i = 0; i < g.atom_count(); ++i) {
      const Atom& a = g.atom(i);
      if (a.element != 6 || a.aromatic || a.isotope || class_size[static_cast<std::size_t>(classes[static_cast<std::size_t>(i)])] != 1) {
        continue;
      }
      const auto nbrs = g.neighbors(i);
      const int h = g.implicit_h(i);
      if (static_cast<int>(nbrs.size()) + h != 4 || h > 1) continue;
      bool ok = true;
      std::vector<int> seen;
      for (const auto& nb : nbrs) {
        if (g.bond(nb.bond).order != BondOrder::single) ok = false;
        const int c = classes[static_cast<std::size_t>(nb.atom)];
        if (std::find(seen.begin(), seen.end(), c) != seen.end()) ok = false;
        seen.push_back(c);
      }
      if (!ok || !rng_.bernoulli(config_.chiral_prob)) continue;
      Atom& target = atoms_[static_cast<std::size_t>(i)];
      target.chirality = rng_.bernoulli(0.5) ? Chirality::clockwise : Chirality::counterclockwise;
      target.explicit_h = h;
      target.stereo_refs.clear();
      for (const auto& nb : nbrs) target.stereo_refs.push_back(nb.atom);
      if (h == 1) target.stereo_refs.push_back(kImplicitHydrogen);
      rng_.shuffle(target.stereo_refs);
      any = true;
    }
    return any ? build(false) : g;
  }

  int size() const { return static_cast<int>(atoms_.size()); }

 private:
  int pick_element() {
    static constexpr std::array<int, 7> kElements = {6, 7, 8, 16, 9, 17, 35};
    const std::array<double, 7> weights = {6.0, config_.nitrogen_weight, 1.5, 0.3, 0.3, 0.3, 0.15};
    double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    double x = rng_.uniform(0.0, total);
    for (std::size_t i = 0; i < kElements.size(); ++i) {
      if (x < weights[i]) return kElements[i];
      x -= weights[i];
    }
    return 6;
  }

  int add_atom(int element) {
    Atom a;
    a.element = element;
    atoms_.push_back(a);
    free_.push_back(max_valence(element));
    adj_.emplace_back();
    return size() - 1;
  }

  void connect(int a, int b, BondOrder order) {
    const int used = order == BondOrder::aromatic ? 1 : static_cast<int>(order);
    free_[static_cast<std::size_t>(a)] -= used;
    free_[static_cast<std::size_t>(b)] -= used;
    bonds_.emplace_back(a, b, order);
    adj_[static_cast<std::size_t>(a)].push_back(b);
    adj_[static_cast<std::size_t>(b)].push_back(a);
  }

  void add_ring(int anchor) {
    const auto& templates = ring_templates();
    const auto& t = templates[rng_.uniform_index(templates.size())];
    const int base = size();
    const int n = static_cast<int>(t.elements.size());
    for (int k = 0; k < n; ++k) {
      Atom a;
      a.element = t.elements[static_cast<std::size_t>(k)];
      a.aromatic = true;
      if (!t.nh.empty() && t.nh[static_cast<std::size_t>(k)]) a.explicit_h = 1;
      atoms_.push_back(a);
      // Aromatic carbons keep one substituent slot; heteroatoms none.
      free_.push_back(a.element == 6 ? 1 : 0);
      adj_.emplace_back();
    }
    for (int k = 0; k < n; ++k) {
      const int a = base + k;
      const int b = base + (k + 1) % n;
      bonds_.emplace_back(a, b, BondOrder::aromatic);
      adj_[static_cast<std::size_t>(a)].push_back(b);
      adj_[static_cast<std::size_t>(b)].push_back(a);
    }
    if (anchor >= 0) {
      std::vector<int> slots;
      for (int k = 0; k < n; ++k) {
        if (free_[static_cast<std::size_t>(base + k)] > 0) slots.push_back(base + k);
      }
      connect(anchor, slots[rng_.uniform_index(slots.size())], BondOrder::single);
    }
  }

  void close_ring(int first) {
    std::vector<int> cands;
    for (int i = first; i < size(); ++i) {
      if (!atoms_[static_cast<std::size_t>(i)].aromatic && free_[static_cast<std::size_t>(i)] > 0) cands.push_back(i);
    }
    if (cands.size() < 2) return;
    const int a = cands[rng_.uniform_index(cands.size())];
    // Ring sizes 3..7: partner at path distance 2..6.
    std::vector<int> dist(static_cast<std::size_t>(size()), -1);
    std::deque<int> queue{a};
    dist[static_cast<std::size_t>(a)] = 0;
    while (!queue.empty()) {
      const int x = queue.front();
      queue.pop_front();
      for (int y : adj_[static_cast<std::size_t>(x)]) {
        if (dist[static_cast<std::size_t>(y)] < 0) {
          dist[static_cast<std::size_t>(y)] = dist[static_cast<std::size_t>(x)] + 1;
          queue.push_back(y);
        }
      }
    }
    std::vector<int> partners;
    for (int b : cands) {
      const int d = dist[static_cast<std::size_t>(b)];
      if (d >= 2 && d <= 6) partners.push_back(b);
    }
    if (partners.empty()) return;
    connect(a, partners[rng_.uniform_index(partners.size())], BondOrder::single);
  }

  Rng& rng_;
  const MolGenConfig& config_;
  std::vector<Atom> atoms_;
  std::vector<int> free_;
  std::vector<std::vector<int>> adj_;
  std::vector<std::tuple<int, int, BondOrder>> bonds_;
};

}  // namespace

MolecularGraph random_molecule(Rng& rng, const MolGenConfig& config) {
  if (config.min_heavy_atoms < 1 || config.max_heavy_atoms < config.min_heavy_atoms) {
    throw ArgumentError("invalid heavy-atom range");
  }
  Assembler assembler(rng, config);
  const int span = config.max_heavy_atoms - config.min_heavy_atoms + 1;
  int target = config.min_heavy_atoms + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(span)));
  if (config.second_fragment_prob > 0 && target >= 4 && rng.bernoulli(config.second_fragment_prob)) {
    const int split = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(target / 2)));
    assembler.grow(target - split);
    assembler.grow(assembler.size() + split);
  } else {
    assembler.grow(target);
  }
  assembler.decorate();
  return assembler.build(true);
}

MolecularGraph random_relabel(const MolecularGraph& graph, Rng& rng) {
  std::vector<int> perm(static_cast<std::size_t>(graph.atom_count()));
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  return relabel(graph, perm);
}

}  // namespace molforge::chem
