#include "isomorphism.hpp"

#include <algorithm>
#include <vector>

namespace molforge::testing {
namespace {

using chem::Chirality;
using chem::MolecularGraph;

bool same_atom(const MolecularGraph& a, int i, const MolecularGraph& b, int j) {
  const auto& x = a.atom(i);
  const auto& y = b.atom(j);
  return x.element == y.element && x.formal_charge == y.formal_charge && x.isotope.value_or(0) == y.isotope.value_or(0) &&
         a.total_h(i) == b.total_h(j) && x.aromatic == y.aromatic && a.degree(i) == b.degree(j) &&
         (x.chirality == Chirality::none) == (y.chirality == Chirality::none);
}

bool odd(std::vector<int> from, const std::vector<int>& to) {
  bool parity = false;
  for (std::size_t i = 0; i < from.size(); ++i) {
    if (from[i] == to[i]) continue;
    auto it = std::find(from.begin() + static_cast<long>(i), from.end(), to[i]);
    if (it == from.end()) return false;
    std::iter_swap(from.begin() + static_cast<long>(i), it);
    parity = !parity;
  }
  return parity;
}

bool stereo_consistent(const MolecularGraph& a, const MolecularGraph& b, const std::vector<int>& map) {
  for (int i = 0; i < a.atom_count(); ++i) {
    const auto& x = a.atom(i);
    if (x.chirality == Chirality::none) continue;
    const auto& y = b.atom(map[static_cast<std::size_t>(i)]);
    std::vector<int> mapped;
    for (int r : x.stereo_refs) mapped.push_back(r == chem::kImplicitHydrogen ? r : map[static_cast<std::size_t>(r)]);
    auto s1 = mapped;
    auto s2 = y.stereo_refs;
    std::sort(s1.begin(), s1.end());
    std::sort(s2.begin(), s2.end());
    if (s1 != s2) return false;
    const bool flipped = odd(mapped, y.stereo_refs);
    if ((x.chirality == y.chirality) == flipped) return false;
  }
  return true;
}

class Matcher {
 public:
  Matcher(const MolecularGraph& a, const MolecularGraph& b)
      : a_(a), b_(b), map_(static_cast<std::size_t>(a.atom_count()), -1), used_(static_cast<std::size_t>(b.atom_count()), false) {
    // Visit atoms so each one after the first in a component touches a mapped neighbor.
    std::vector<bool> seen(static_cast<std::size_t>(a.atom_count()), false);
    for (int s = 0; s < a.atom_count(); ++s) {
      if (seen[static_cast<std::size_t>(s)]) continue;
      std::vector<int> queue{s};
      seen[static_cast<std::size_t>(s)] = true;
      for (std::size_t k = 0; k < queue.size(); ++k) {
        order_.push_back(queue[k]);
        for (const auto& nb : a.neighbors(queue[k])) {
          if (!seen[static_cast<std::size_t>(nb.atom)]) {
            seen[static_cast<std::size_t>(nb.atom)] = true;
            queue.push_back(nb.atom);
          }
        }
      }
    }
  }

  bool run(std::size_t depth = 0) {
    if (depth == order_.size()) return stereo_consistent(a_, b_, map_);
    const int i = order_[depth];
    for (int j = 0; j < b_.atom_count(); ++j) {
      if (used_[static_cast<std::size_t>(j)] || !same_atom(a_, i, b_, j)) continue;
      bool ok = true;
      for (const auto& nb : a_.neighbors(i)) {
        const int mj = map_[static_cast<std::size_t>(nb.atom)];
        if (mj < 0) continue;
        const auto bond = b_.bond_between(j, mj);
        if (!bond || b_.bond(*bond).order != a_.bond(nb.bond).order) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      map_[static_cast<std::size_t>(i)] = j;
      used_[static_cast<std::size_t>(j)] = true;
      if (run(depth + 1)) return true;
      map_[static_cast<std::size_t>(i)] = -1;
      used_[static_cast<std::size_t>(j)] = false;
    }
    return false;
  }

 private:
  const MolecularGraph& a_;
  const MolecularGraph& b_;
  std::vector<int> map_;
  std::vector<bool> used_;
  std::vector<int> order_;
};

}  // namespace

bool isomorphic(const MolecularGraph& a, const MolecularGraph& b) {
  if (a.atom_count() != b.atom_count() || a.bond_count() != b.bond_count()) return false;
  return Matcher(a, b).run();
}

}  // namespace molforge::testing
