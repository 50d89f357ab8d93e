// Wildman-Crippen atom typing. Each element's rules are tried in the
// published order and the first match wins; neighbor requirements within one
// rule must be met by distinct neighbors. Unspecified bonds in a rule accept
// single or aromatic bonds, as in the original SMARTS definitions.
#include <algorithm>
#include <array>
#include <functional>
#include <initializer_list>
#include <string>

#include "molforge/chem/element.hpp"
#include "molforge/common/io.hpp"
#include "molforge/data/embedded.hpp"
#include "molforge/desc/descriptors.hpp"

namespace molforge::desc {
namespace {

using chem::BondOrder;
using chem::MolecularGraph;

enum class BondRule : std::uint8_t { any_default, single, double_, triple, aromatic };

bool bond_ok(BondRule rule, BondOrder order) {
  switch (rule) {
    case BondRule::any_default: return order == BondOrder::single || order == BondOrder::aromatic;
    case BondRule::single: return order == BondOrder::single;
    case BondRule::double_: return order == BondOrder::double_;
    case BondRule::triple: return order == BondOrder::triple;
    case BondRule::aromatic: return order == BondOrder::aromatic;
  }
  return false;
}

using AtomRule = std::function<bool(int)>;

struct NeighborRule {
  BondRule bond;
  AtomRule atom;
};

class Typer {
 public:
  explicit Typer(const MolecularGraph& graph) : g_(graph) {}

  int z(int a) const { return g_.atom(a).element; }
  bool arom(int a) const { return g_.atom(a).aromatic; }
  int h(int a) const { return g_.total_h(a); }
  int charge(int a) const { return g_.atom(a).formal_charge; }
  // Total connections including implicit hydrogens.
  int x(int a) const { return g_.degree(a) + g_.implicit_h(a); }

  // Aliphatic element as written with an upper-case symbol in a rule.
  bool aliph(int a, int element) const { return z(a) == element && !arom(a); }
  bool heavy_aliph(int a) const { return z(a) != 1 && !arom(a); }
  bool heavy(int a) const { return z(a) != 1; }
  bool aliph_in(int a, std::initializer_list<int> elements) const {
    return !arom(a) && std::find(elements.begin(), elements.end(), z(a)) != elements.end();
  }
  // [N,O,P,S,F,Cl,Br,I]
  bool hetero(int a) const { return aliph_in(a, {7, 8, 15, 16, 9, 17, 35, 53}); }

  // True when every rule is satisfied by a distinct neighbor of `center`.
  bool has(int center, std::initializer_list<NeighborRule> rules) const {
    std::vector<NeighborRule> list(rules);
    std::vector<bool> used(static_cast<std::size_t>(g_.degree(center)), false);
    return assign(center, list, 0, used);
  }

  std::string heavy_type(int a) const {
    switch (z(a)) {
      case 1: return "";
      case 6: return carbon(a);
      case 7: return nitrogen(a);
      case 8: return oxygen(a);
      case 9: return halogen(a, "F");
      case 17: return halogen(a, "Cl");
      case 35: return halogen(a, "Br");
      case 53: return halogen(a, "I");
      case 15: return "P";
      case 16: return sulfur(a);
      default: return metal(a);
    }
  }

  // Type of a hydrogen bonded to `parent`; `self` is the hydrogen atom when
  // it is stored explicitly (-1 for implicit ones).
  std::string hydrogen_type(int parent, int self) const {
    if (parent < 0) return "HS";
    if (z(parent) == 6 || z(parent) == 1) return "H1";
    const bool parent_is_o = aliph(parent, 8);
    // Other neighbors of the parent, implicit hydrogens included as -1.
    std::vector<int> others;
    for (const auto& nb : g_.neighbors(parent)) {
      if (nb.atom != self) others.push_back(nb.atom);
    }
    const int implicit = g_.implicit_h(parent) - (self < 0 ? 1 : 0);
    for (int k = 0; k < implicit; ++k) others.push_back(-1);
    auto is = [&](int atom, auto pred) { return atom >= 0 && pred(atom); };

    if (parent_is_o) {
      for (int o : others) {
        if (is(o, [&](int t) { return (aliph(t, 6) && x(t) == 4) || (z(t) == 6 && arom(t)); })) return "H2";
      }
      for (int o : others) {
        if (o < 0 || !(aliph(o, 6) || aliph(o, 7) || aliph(o, 8) || aliph(o, 16))) return "H2";
      }
    }
    // The reference parameterization types N-H on aromatic nitrogen as an
    // amine hydrogen, so this rule tests elements regardless of aromaticity.
    if (z(parent) != 7 && z(parent) != 8) return "H2";
    if (z(parent) == 7) return "H3";
    if (parent_is_o) {
      for (int o : others) {
        if (is(o, [&](int t) { return z(t) == 7; })) return "H3";
      }
      for (int o : others) {
        if (o < 0 || !aliph(o, 6)) continue;
        for (const auto& nb : g_.neighbors(o)) {
          if (nb.atom == parent || g_.bond(nb.bond).order != BondOrder::double_) continue;
          const int t = nb.atom;
          if (z(t) == 6 || z(t) == 7 || aliph(t, 8) || aliph(t, 16)) return "H4";
        }
      }
      for (int o : others) {
        if (is(o, [&](int t) { return aliph(t, 8) || aliph(t, 16); })) return "H4";
      }
    }
    return "HS";
  }

 private:
  bool assign(int center, const std::vector<NeighborRule>& rules, std::size_t k, std::vector<bool>& used) const {
    if (k == rules.size()) return true;
    const auto nbrs = g_.neighbors(center);
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      if (used[i]) continue;
      if (!bond_ok(rules[k].bond, g_.bond(nbrs[i].bond).order) || !rules[k].atom(nbrs[i].atom)) continue;
      used[i] = true;
      if (assign(center, rules, k + 1, used)) return true;
      used[i] = false;
    }
    return false;
  }

  std::string carbon(int a) const {
    using B = BondRule;
    const AtomRule C = [&](int t) { return aliph(t, 6); };
    const AtomRule c = [&](int t) { return z(t) == 6 && arom(t); };
    const AtomRule any_arom = [&](int t) { return arom(t); };
    const AtomRule heavy_a = [&](int t) { return heavy_aliph(t); };
    const AtomRule het = [&](int t) { return hetero(t); };
    const int hc = h(a);
    const int xc = x(a);

    if (!arom(a)) {
      if (hc == 4) return "C1";
      if (hc == 3 && has(a, {{B::any_default, C}})) return "C1";
      if (hc == 2 && has(a, {{B::any_default, C}, {B::any_default, C}})) return "C1";
      if (hc == 1 && has(a, {{B::any_default, C}, {B::any_default, C}, {B::any_default, C}})) return "C2";
      if (has(a, {{B::any_default, C}, {B::any_default, C}, {B::any_default, C}, {B::any_default, C}})) return "C2";
      if (hc == 3 && has(a, {{B::any_default, het}})) return "C3";
      if (hc == 2 && xc == 4 && has(a, {{B::any_default, het}, {B::any_default, heavy_a}})) return "C3";
      if (hc == 1 && xc == 4 && has(a, {{B::any_default, het}, {B::any_default, heavy_a}, {B::any_default, heavy_a}})) {
        return "C4";
      }
      if (hc == 0 && xc == 4 &&
          has(a, {{B::any_default, het}, {B::any_default, heavy_a}, {B::any_default, heavy_a}, {B::any_default, heavy_a}})) {
        return "C4";
      }
      if (has(a, {{B::double_, [&](int t) { return heavy_aliph(t) && z(t) != 6; }}})) return "C5";
      if (hc == 2 && has(a, {{B::double_, C}})) return "C6";
      if (hc == 1 && has(a, {{B::double_, C}, {B::any_default, heavy_a}})) return "C6";
      if (hc == 0 && has(a, {{B::double_, C}, {B::any_default, heavy_a}, {B::any_default, heavy_a}})) return "C6";
      if (has(a, {{B::double_, C}, {B::double_, C}})) return "C6";
      if (xc == 2 && has(a, {{B::triple, heavy_a}})) return "C7";
      if (hc == 3 && has(a, {{B::any_default, c}})) return "C8";
      if (hc == 3 && has(a, {{B::any_default, any_arom}})) return "C9";
      if (xc == 4 && has(a, {{B::any_default, any_arom}})) {
        if (hc == 2) return "C10";
        if (hc == 1) return "C11";
        if (hc == 0) return "C12";
      }
    } else {
      if (hc == 0 && has(a, {{B::single, [&](int t) {
                             return heavy_aliph(t) && !aliph_in(t, {6, 7, 8, 16, 9, 17, 35, 53});
                           }}})) {
        return "C13";
      }
      if (has(a, {{B::any_default, [&](int t) { return z(t) == 9; }}})) return "C14";
      if (has(a, {{B::any_default, [&](int t) { return z(t) == 17; }}})) return "C15";
      if (has(a, {{B::any_default, [&](int t) { return z(t) == 35; }}})) return "C16";
      if (has(a, {{B::any_default, [&](int t) { return z(t) == 53; }}})) return "C17";
      if (hc == 1) return "C18";
      const NeighborRule ring_nb{B::aromatic, any_arom};
      if (has(a, {ring_nb, ring_nb, ring_nb})) return "C19";
      if (has(a, {ring_nb, ring_nb, {B::single, any_arom}})) return "C20";
      if (has(a, {ring_nb, ring_nb, {B::single, C}})) return "C21";
      if (has(a, {ring_nb, ring_nb, {B::single, [&](int t) { return aliph(t, 7); }}})) return "C22";
      if (has(a, {ring_nb, ring_nb, {B::single, [&](int t) { return aliph(t, 8); }}})) return "C23";
      if (has(a, {ring_nb, ring_nb, {B::single, [&](int t) { return aliph(t, 16); }}})) return "C24";
      if (has(a, {ring_nb, ring_nb, {B::double_, [&](int t) { return aliph_in(t, {6, 7, 8}); }}})) return "C25";
    }
    if (!arom(a)) {
      if (has(a, {{B::double_, C}, {B::any_default, any_arom}, {B::any_default, heavy_a}})) return "C26";
      if (has(a, {{B::double_, C}, {B::any_default, c}, {B::any_default, any_arom}})) return "C26";
      if (hc == 1 && has(a, {{B::double_, C}, {B::any_default, any_arom}})) return "C26";
      if (has(a, {{B::double_, c}})) return "C26";
      if (xc == 4 && has(a, {{B::any_default, [&](int t) {
                           return heavy_aliph(t) && !aliph_in(t, {6, 7, 8, 15, 16, 9, 17, 35, 53});
                         }}})) {
        return "C27";
      }
    }
    return "CS";
  }

  std::string nitrogen(int a) const {
    using B = BondRule;
    const AtomRule heavy_a = [&](int t) { return heavy_aliph(t); };
    const AtomRule heavy_any = [&](int t) { return heavy(t); };
    const AtomRule any_arom = [&](int t) { return arom(t); };
    const int hn = h(a);
    const int q = charge(a);

    if (!arom(a)) {
      if (q == 0) {
        if (hn == 2 && has(a, {{B::any_default, heavy_a}})) return "N1";
        if (hn == 1 && has(a, {{B::any_default, heavy_a}, {B::any_default, heavy_a}})) return "N2";
        if (hn == 2 && has(a, {{B::any_default, any_arom}})) return "N3";
        if (hn == 1 && has(a, {{B::any_default, heavy_any}, {B::any_default, any_arom}})) return "N4";
        if (hn == 1 && has(a, {{B::double_, heavy_any}})) return "N5";
        if (has(a, {{B::double_, heavy_any}, {B::any_default, heavy_any}})) return "N6";
        if (has(a, {{B::any_default, heavy_a}, {B::any_default, heavy_a}, {B::any_default, heavy_a}})) return "N7";
        if (has(a, {{B::any_default, any_arom}, {B::any_default, heavy_any}, {B::any_default, heavy_a}})) return "N8";
        if (has(a, {{B::any_default, any_arom}, {B::any_default, any_arom}, {B::any_default, any_arom}})) return "N8";
        if (has(a, {{B::triple, heavy_a}})) return "N9";
      }
      if (q >= 1 && q <= 3 && hn >= 1 && hn <= 3) return "N10";
    } else {
      if (q == 0) return "N11";
      if (q >= 1 && q <= 3) return "N12";
    }
    if (!arom(a) && hn == 0 && q >= 1 && q <= 3) {
      if (has(a, {{B::any_default, heavy_a}, {B::any_default, heavy_a}, {B::any_default, heavy_a},
                  {B::any_default, heavy_a}})) {
        return "N13";
      }
      if (has(a, {{B::double_, heavy_a}, {B::any_default, heavy_a}, {B::any_default, heavy_any}})) return "N13";
      if (has(a, {{B::double_, [&](int t) { return z(t) == 6; }}, {B::double_, [&](int t) { return z(t) == 7; }}})) {
        return "N13";
      }
    }
    if (!arom(a)) {
      if (q >= 1 && q <= 3 && has(a, {{B::triple, heavy_a}})) return "N14";
      if (q <= -1 && q >= -3) return "N14";
      if (q >= 1 && q <= 3 &&
          has(a, {{B::double_, [&](int t) { return aliph(t, 7) && charge(t) <= -1 && charge(t) >= -3; }},
                  {B::double_, [&](int t) { return aliph(t, 7); }}})) {
        return "N14";
      }
    }
    return "NS";
  }

  std::string oxygen(int a) const {
    using B = BondRule;
    const AtomRule heavy_a = [&](int t) { return heavy_aliph(t); };
    const AtomRule heavy_any = [&](int t) { return heavy(t); };
    const AtomRule any_arom = [&](int t) { return arom(t); };
    const AtomRule C = [&](int t) { return aliph(t, 6); };
    const int ho = h(a);
    const int q = charge(a);
    const int xo = x(a);
    const bool anion = q <= -1 && q >= -3;

    if (arom(a)) return "O1";
    if (ho == 1 || ho == 2) return "O2";
    if (has(a, {{B::any_default, heavy_a}, {B::any_default, heavy_a}})) return "O3";
    if (has(a, {{B::any_default, any_arom}, {B::any_default, heavy_any}})) return "O4";
    if (has(a, {{B::double_, [&](int t) { return z(t) == 7 || z(t) == 8; }}})) return "O5";
    if (xo == 1 && anion && has(a, {{B::any_default, [&](int t) { return z(t) == 7; }}})) return "O5";
    if (xo == 1 && anion && has(a, {{B::any_default, [&](int t) { return z(t) == 16; }}})) return "O6";
    if (q == 0 && has(a, {{B::double_, [&](int t) { return z(t) == 16 && charge(t) == 0; }}})) return "O6";
    if (q == -1) {
      for (const auto& nb : g_.neighbors(a)) {
        const int t = nb.atom;
        if (!bond_ok(B::any_default, g_.bond(nb.bond).order) || !aliph(t, 6)) continue;
        if (has(t, {{B::double_, [&](int u) { return aliph(u, 8) && u != a; }}})) return "O12";
      }
    }
    if (xo == 1 && anion &&
        has(a, {{B::any_default, [&](int t) { return heavy(t) && !aliph(t, 7) && !aliph(t, 16); }}})) {
      return "O7";
    }
    if (has(a, {{B::double_, [&](int t) { return z(t) == 6 && arom(t); }}})) return "O8";

    // Carbonyl oxygens: inspect the carbon across the double bond.
    for (const auto& nb : g_.neighbors(a)) {
      if (g_.bond(nb.bond).order != BondOrder::double_ || !aliph(nb.atom, 6)) continue;
      const int cc = nb.atom;
      auto others = [&](std::initializer_list<NeighborRule> rules) {
        // Rules apply to neighbors of the carbon other than this oxygen.
        std::vector<NeighborRule> list(rules);
        list.insert(list.begin(), {B::double_, [&](int t) { return t == a; }});
        std::vector<bool> used(static_cast<std::size_t>(g_.degree(cc)), false);
        return assign(cc, list, 0, used);
      };
      const int hcc = h(cc);
      if (hcc == 1 && others({{B::any_default, C}})) return "O9";
      if (others({{B::any_default, C}, {B::any_default, heavy_a}})) return "O9";
      if (hcc == 1 && others({{B::any_default, [&](int t) { return aliph(t, 7) || aliph(t, 8); }}})) return "O9";
      if (hcc == 2) return "O9";
      if (x(cc) == 2 && others({{B::double_, [&](int t) { return aliph(t, 8); }}})) return "O9";
      const AtomRule c_any = [&](int t) { return z(t) == 6; };
      const AtomRule c_arom = [&](int t) { return z(t) == 6 && arom(t); };
      if (hcc == 1 && others({{B::any_default, c_arom}})) return "O10";
      if (others({{B::any_default, c_any}, {B::any_default, [&](int t) { return arom(t) && heavy(t); }}})) return "O10";
      if (others({{B::any_default, c_arom}, {B::any_default, heavy_a}})) return "O10";
      const AtomRule non_c = [&](int t) { return heavy(t) && z(t) != 6; };
      if (others({{B::any_default, non_c}, {B::any_default, non_c}})) return "O11";
    }
    return "OS";
  }

  std::string halogen(int a, const char* neutral) const {
    const int q = charge(a);
    if (q == 0) return neutral;
    if (q == -1 || (z(a) == 53 && q >= 1 && q <= 3)) return "Hal";
    return "";
  }

  std::string sulfur(int a) const {
    const int q = charge(a);
    if (!arom(a)) {
      if (q != 0 && q >= -4 && q <= 6 && q != 4) return "S2";
      if (q == 0 && has(a, {{BondRule::double_, [&](int t) { return aliph_in(t, {7, 8, 15, 16}); }}})) return "S2";
      return "S1";
    }
    return "S3";
  }

  std::string metal(int a) const {
    const int e = z(a);
    const bool alkali = e == 3 || e == 11 || e == 19 || e == 37 || e == 55;
    if (alkali && charge(a) == 1) return "Hal";
    static constexpr std::array<int, 25> kMe1 = {3,  11, 19, 37, 55, 4,  12, 20, 38, 56, 5,  13, 31,
                                                 49, 81, 14, 32, 50, 82, 33, 51, 83, 34, 52, 84};
    if (std::find(kMe1.begin(), kMe1.end(), e) != kMe1.end()) return "Me1";
    if ((e >= 21 && e <= 30) || (e >= 39 && e <= 48) || (e >= 72 && e <= 80)) return "Me2";
    return "";
  }

  const MolecularGraph& g_;
};

constexpr std::array<std::string_view, 72> kTypeNames = {
    "C1",  "C2",  "C3",  "C4",  "C5",  "C6",  "C7",  "C8",  "C9",  "C10", "C11", "C12", "C13", "C14", "C15",
    "C16", "C17", "C18", "C19", "C20", "C21", "C22", "C23", "C24", "C25", "C26", "C27", "CS",  "H1",  "H2",
    "H3",  "H4",  "HS",  "N1",  "N2",  "N3",  "N4",  "N5",  "N6",  "N7",  "N8",  "N9",  "N10", "N11", "N12",
    "N13", "N14", "NS",  "O1",  "O2",  "O3",  "O4",  "O5",  "O6",  "O12", "O7",  "O8",  "O9",  "O10", "O11",
    "OS",  "F",   "Cl",  "Br",  "I",   "Hal", "P",   "S2",  "S1",  "S3",  "Me1", "Me2"};

}  // namespace

std::span<const std::string_view> crippen_type_names() { return kTypeNames; }

CrippenTable CrippenTable::parse(std::string_view text) {
  CrippenTable table;
  std::size_t line_no = 0;
  for (const auto& raw : io::split_lines(text)) {
    ++line_no;
    const auto line = io::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = io::split(raw, '\t');
    if (fields.size() < 2) {
      throw DataError("Crippen table line " + std::to_string(line_no) + ": expected type and logP columns");
    }
    double value = 0;
    try {
      std::size_t used = 0;
      value = std::stod(fields[1], &used);
      if (used != fields[1].size()) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      throw DataError("Crippen table line " + std::to_string(line_no) + ": bad logP value '" + fields[1] + "'");
    }
    if (!table.logp_.emplace(fields[0], value).second) {
      throw DataError("Crippen table line " + std::to_string(line_no) + ": duplicate type " + fields[0]);
    }
  }
  for (auto name : kTypeNames) {
    if (!table.logp_.contains(name)) throw DataError("Crippen table is missing type " + std::string(name));
  }
  return table;
}

const CrippenTable& CrippenTable::builtin() {
  static const CrippenTable kTable = parse(data::embedded("crippen_contributions.tsv"));
  return kTable;
}

double CrippenTable::logp(std::string_view type) const {
  const auto it = logp_.find(type);
  if (it == logp_.end()) throw ArgumentError("unknown Crippen type " + std::string(type));
  return it->second;
}

CrippenAtomTypes crippen_atom_types(const chem::MolecularGraph& graph) {
  Typer typer(graph);
  CrippenAtomTypes out;
  const int n = graph.atom_count();
  out.atom_types.resize(static_cast<std::size_t>(n));
  out.implicit_h_types.resize(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    const auto& atom = graph.atom(a);
    std::string type;
    if (atom.element == 1) {
      const auto nbrs = graph.neighbors(a);
      type = typer.hydrogen_type(nbrs.empty() ? -1 : nbrs.front().atom, a);
    } else {
      type = typer.heavy_type(a);
    }
    if (type.empty()) {
      out.diagnostics.push_back("atom " + std::to_string(a) + " (" + std::string(chem::element(atom.element).symbol) +
                                ") matches no Crippen type; contributes 0");
    }
    out.atom_types[static_cast<std::size_t>(a)] = std::move(type);
    if (graph.implicit_h(a) > 0) out.implicit_h_types[static_cast<std::size_t>(a)] = typer.hydrogen_type(a, -1);
  }
  return out;
}

double crippen_logp(const chem::MolecularGraph& graph, std::vector<std::string>* diagnostics) {
  const auto& table = CrippenTable::builtin();
  const auto types = crippen_atom_types(graph);
  double total = 0;
  for (int a = 0; a < graph.atom_count(); ++a) {
    const auto& type = types.atom_types[static_cast<std::size_t>(a)];
    if (!type.empty()) total += table.logp(type);
    const int implicit = graph.implicit_h(a);
    if (implicit > 0) total += implicit * table.logp(types.implicit_h_types[static_cast<std::size_t>(a)]);
  }
  if (diagnostics) diagnostics->insert(diagnostics->end(), types.diagnostics.begin(), types.diagnostics.end());
  return total;
}

}  // namespace molforge::desc
