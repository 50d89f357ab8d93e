#include "molforge/fp/fingerprint.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "molforge/chem/smiles.hpp"
#include "molforge/common/error.hpp"
#include "molforge/common/hash.hpp"

namespace molforge::fp {

using chem::MolecularGraph;

bool Fingerprint::test(int bit) const { return std::binary_search(set_bits.begin(), set_bits.end(), bit); }

std::vector<float> Fingerprint::dense() const {
  std::vector<float> v(static_cast<std::size_t>(n_bits), 0.0f);
  for (int b : set_bits) v[static_cast<std::size_t>(b)] = 1.0f;
  return v;
}

std::string Fingerprint::to_bitstring() const {
  std::string s(static_cast<std::size_t>(n_bits), '0');
  for (int b : set_bits) s[static_cast<std::size_t>(b)] = '1';
  return s;
}

std::uint64_t atom_invariant(const MolecularGraph& graph, int atom) {
  const auto& a = graph.atom(atom);
  std::uint64_t h = 0x5eedf00dULL;
  h = hash_combine(h, static_cast<std::uint64_t>(a.element));
  h = hash_combine(h, static_cast<std::uint64_t>(graph.heavy_degree(atom)));
  h = hash_combine(h, static_cast<std::uint64_t>(graph.total_h(atom)));
  h = hash_combine(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(a.formal_charge)));
  h = hash_combine(h, graph.atom_in_ring(atom) ? 1 : 0);
  h = hash_combine(h, a.aromatic ? 1 : 0);
  return h;
}

std::vector<EnvironmentId> morgan_environments(const MolecularGraph& graph, int radius) {
  if (radius < 0) throw ArgumentError("radius must be non-negative");
  // Hydrogen atoms written as [H] are folded into their neighbor's H count.
  std::vector<int> heavy;
  for (int a = 0; a < graph.atom_count(); ++a) {
    if (graph.atom(a).element != 1 || graph.degree(a) == 0) heavy.push_back(a);
  }
  const auto ranks = chem::canonical_ranks(graph);
  std::sort(heavy.begin(), heavy.end(), [&](int x, int y) { return ranks[static_cast<std::size_t>(x)] < ranks[static_cast<std::size_t>(y)]; });

  const auto n = static_cast<std::size_t>(graph.atom_count());
  std::vector<std::uint64_t> ids(n, 0);
  std::vector<std::vector<bool>> covered(n, std::vector<bool>(n, false));
  std::vector<std::set<int>> bond_sets(n);
  for (int a : heavy) {
    ids[static_cast<std::size_t>(a)] = atom_invariant(graph, a);
    covered[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)] = true;
  }

  std::vector<EnvironmentId> out;
  std::set<std::vector<bool>> seen;
  for (int a : heavy) {
    out.push_back({ids[static_cast<std::size_t>(a)], a, 0});
    seen.insert(covered[static_cast<std::size_t>(a)]);
  }

  for (int r = 1; r <= radius; ++r) {
    auto next_ids = ids;
    auto next_cov = covered;
    for (int a : heavy) {
      std::vector<std::pair<std::uint64_t, std::uint64_t>> env;
      for (const auto& nb : graph.neighbors(a)) {
        if (graph.atom(nb.atom).element == 1) continue;
        env.emplace_back(static_cast<std::uint64_t>(graph.bond(nb.bond).order), ids[static_cast<std::size_t>(nb.atom)]);
        auto& cov = next_cov[static_cast<std::size_t>(a)];
        const auto& theirs = covered[static_cast<std::size_t>(nb.atom)];
        for (std::size_t k = 0; k < n; ++k) cov[k] = cov[k] || theirs[k];
      }
      std::sort(env.begin(), env.end());
      std::uint64_t h = hash_combine(ids[static_cast<std::size_t>(a)], static_cast<std::uint64_t>(r));
      for (const auto& [order, id] : env) h = hash_combine(hash_combine(h, order), id);
      next_ids[static_cast<std::size_t>(a)] = h;
    }
    ids = std::move(next_ids);
    covered = std::move(next_cov);
    for (int a : heavy) {
      if (seen.insert(covered[static_cast<std::size_t>(a)]).second) out.push_back({ids[static_cast<std::size_t>(a)], a, r});
    }
  }
  return out;
}

Fingerprint morgan_fingerprint(const MolecularGraph& graph, int radius, int n_bits, bool log_environments) {
  if (n_bits < 1) throw ArgumentError("n_bits must be at least 1");
  Fingerprint fp;
  fp.n_bits = n_bits;
  for (const auto& env : morgan_environments(graph, radius)) {
    const int bit = static_cast<int>(env.value % static_cast<std::uint64_t>(n_bits));
    fp.set_bits.push_back(bit);
    if (log_environments) fp.environment_log[bit].emplace_back(env.center, env.radius);
  }
  std::sort(fp.set_bits.begin(), fp.set_bits.end());
  fp.set_bits.erase(std::unique(fp.set_bits.begin(), fp.set_bits.end()), fp.set_bits.end());
  return fp;
}

}  // namespace molforge::fp
