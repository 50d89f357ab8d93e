#include "molforge/pattern/pattern.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include <spdlog/spdlog.h>

#include "molforge/chem/element.hpp"
#include "molforge/common/hash.hpp"
#include "molforge/common/io.hpp"
#include "molforge/data/embedded.hpp"

namespace molforge::pattern {

using chem::MolecularGraph;

PatternError::PatternError(std::string construct, std::size_t position, const std::string& message)
    : DataError(message), construct_(std::move(construct)), position_(position) {}

bool AtomPredicate::matches(const MolecularGraph& g, int atom) const {
  const auto& a = g.atom(atom);
  for (const auto& t : terms) {
    bool ok = true;
    switch (t.kind) {
      case Primitive::Kind::any: ok = true; break;
      case Primitive::Kind::element:
        ok = a.element == t.value && (!t.aromatic_flag || *t.aromatic_flag == a.aromatic);
        break;
      case Primitive::Kind::aromatic: ok = a.aromatic; break;
      case Primitive::Kind::aliphatic: ok = !a.aromatic; break;
      case Primitive::Kind::hydrogen_count: ok = g.total_h(atom) == t.value; break;
      case Primitive::Kind::degree: ok = g.degree(atom) == t.value; break;
      case Primitive::Kind::ring: ok = t.value < 0 ? g.atom_in_ring(atom) : g.ring_membership(atom) == t.value; break;
      case Primitive::Kind::charge: ok = a.formal_charge == t.value; break;
    }
    if (ok == t.negated) return false;
  }
  return true;
}

bool bond_matches(BondPredicate p, chem::BondOrder order) {
  using chem::BondOrder;
  switch (p) {
    case BondPredicate::single: return order == BondOrder::single;
    case BondPredicate::double_: return order == BondOrder::double_;
    case BondPredicate::triple: return order == BondOrder::triple;
    case BondPredicate::aromatic: return order == BondOrder::aromatic;
    case BondPredicate::any: return true;
    case BondPredicate::single_or_aromatic: return order == BondOrder::single || order == BondOrder::aromatic;
  }
  return false;
}

bool Pattern::has_wildcard() const {
  for (const auto& a : atoms) {
    bool has_element = false;
    for (const auto& t : a.terms) {
      if (t.kind == Primitive::Kind::element && !t.negated) has_element = true;
    }
    if (!has_element) return true;
  }
  return false;
}

namespace {

class PatternParser {
 public:
  PatternParser(std::string_view text, std::string name) : text_(text) {
    pattern_.name = std::move(name);
    pattern_.source = std::string(text);
  }

  Pattern run() {
    if (text_.empty()) fail("empty pattern", 0, "empty pattern");
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      const std::size_t here = pos_;
      switch (c) {
        case '-': case '=': case '#': case ':': case '~':
          if (pending_) fail("bond", here, "two bond symbols in a row");
          pending_ = c == '-' ? BondPredicate::single
                     : c == '=' ? BondPredicate::double_
                     : c == '#' ? BondPredicate::triple
                     : c == ':' ? BondPredicate::aromatic
                                : BondPredicate::any;
          ++pos_;
          break;
        case '/': case '\\': fail("stereo", here, "directional bonds (stereo) are not supported in patterns");
        case '@': fail("stereo", here, "stereo and ring-bond '@' primitives are not supported in patterns");
        case ',': fail("OR-list", here, "OR-lists (',') are not supported in patterns");
        case '$': fail("recursive SMARTS", here, "recursive SMARTS ('$(') is not supported");
        case '.': fail("disconnected pattern", here, "patterns must be a single connected component");
        case '!': fail("bond negation", here, "negated bonds are not supported in patterns");
        case '(':
          if (prev_ < 0) fail("branch", here, "branch without a preceding atom");
          branches_.push_back(prev_);
          ++pos_;
          break;
        case ')':
          if (branches_.empty()) fail("branch", here, "unbalanced parenthesis");
          prev_ = branches_.back();
          branches_.pop_back();
          ++pos_;
          break;
        case '%': {
          if (pos_ + 2 >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) ||
              !std::isdigit(static_cast<unsigned char>(text_[pos_ + 2]))) {
            fail("ring closure", here, "'%' must be followed by two digits");
          }
          const int number = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
          pos_ += 3;
          ring(number, here);
          break;
        }
        case '[':
          add_atom(bracket());
          break;
        default:
          if (std::isdigit(static_cast<unsigned char>(c))) {
            ++pos_;
            ring(c - '0', here);
          } else {
            add_atom(bare());
          }
      }
    }
    if (pending_) fail("bond", text_.size() - 1, "bond symbol at end of pattern");
    if (!branches_.empty()) fail("branch", text_.size() - 1, "unbalanced parenthesis");
    if (!rings_.empty()) fail("ring closure", rings_.begin()->second.second, "unclosed ring closure");
    if (pattern_.atoms.empty()) fail("empty pattern", 0, "pattern has no atoms");
    return std::move(pattern_);
  }

 private:
  [[noreturn]] void fail(const std::string& construct, std::size_t pos, const std::string& message) const {
    throw PatternError(construct, pos,
                       "pattern '" + std::string(text_) + "' at offset " + std::to_string(pos) + ": " + message);
  }

  AtomPredicate bare() {
    const std::size_t here = pos_;
    const char c = text_[pos_];
    Primitive p;
    if (c == '*') {
      ++pos_;
      return AtomPredicate{{p}};
    }
    if (c == 'a' || c == 'A') {
      ++pos_;
      p.kind = c == 'a' ? Primitive::Kind::aromatic : Primitive::Kind::aliphatic;
      return AtomPredicate{{p}};
    }
    p.kind = Primitive::Kind::element;
    const char n = pos_ + 1 < text_.size() ? text_[pos_ + 1] : '\0';
    if ((c == 'C' && n == 'l') || (c == 'B' && n == 'r')) {
      p.value = c == 'C' ? 17 : 35;
      p.aromatic_flag = false;
      pos_ += 2;
      return AtomPredicate{{p}};
    }
    static const std::map<char, std::pair<int, bool>> kOrganic = {
        {'B', {5, false}}, {'C', {6, false}}, {'N', {7, false}}, {'O', {8, false}}, {'P', {15, false}},
        {'S', {16, false}}, {'F', {9, false}}, {'I', {53, false}}, {'b', {5, true}},  {'c', {6, true}},
        {'n', {7, true}},  {'o', {8, true}},  {'p', {15, true}},  {'s', {16, true}}};
    auto it = kOrganic.find(c);
    if (it == kOrganic.end()) {
      if (c == 'X') fail("X primitive", here, "X (total connectivity) primitive is not supported");
      fail("unknown symbol", here, std::string("unexpected character '") + c + "'");
    }
    p.value = it->second.first;
    p.aromatic_flag = it->second.second;
    ++pos_;
    return AtomPredicate{{p}};
  }

  int number_or(int fallback) {
    if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) return fallback;
    int v = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      v = v * 10 + (text_[pos_] - '0');
      ++pos_;
      if (v > 999) fail("number", pos_, "number too large");
    }
    return v;
  }

  AtomPredicate bracket() {
    const std::size_t open = pos_;
    ++pos_;
    AtomPredicate pred;
    bool negate = false;
    bool expect_term = true;
    while (true) {
      if (pos_ >= text_.size()) fail("bracket", open, "unterminated bracket atom");
      const char c = text_[pos_];
      const std::size_t here = pos_;
      if (c == ']') {
        if (expect_term && !pred.terms.empty()) fail("bracket", here, "dangling operator in bracket atom");
        if (pred.terms.empty()) fail("bracket", here, "empty bracket atom");
        ++pos_;
        break;
      }
      if (c == '&' || c == ';') {
        if (expect_term) fail("bracket", here, "operator without a preceding primitive");
        expect_term = true;
        ++pos_;
        continue;
      }
      if (c == '!') {
        negate = !negate;
        ++pos_;
        continue;
      }
      switch (c) {
        case ',': fail("OR-list", here, "OR-lists (',') are not supported in patterns");
        case '$': fail("recursive SMARTS", here, "recursive SMARTS ('$(') is not supported");
        case '@': fail("stereo", here, "chirality primitives are not supported in patterns");
        case 'X': fail("X primitive", here, "X (total connectivity) primitive is not supported");
        case 'v': fail("v primitive", here, "v (valence) primitive is not supported");
        case 'x': fail("x primitive", here, "x (ring connectivity) primitive is not supported");
        case 'r': fail("r primitive", here, "r (ring size) primitive is not supported");
        case '^': fail("hybridization primitive", here, "hybridization primitives are not supported");
        default: break;
      }
      // Adjacent primitives without an operator form an implicit conjunction.
      Primitive p;
      p.negated = negate;
      negate = false;
      const char n = pos_ + 1 < text_.size() ? text_[pos_ + 1] : '\0';
      const bool lower_next = std::islower(static_cast<unsigned char>(n)) != 0;
      if (c == '*') {
        ++pos_;
      } else if (c == '#') {
        ++pos_;
        p.kind = Primitive::Kind::element;
        p.value = number_or(-1);
        if (p.value < 1 || p.value > chem::kMaxAtomicNumber) fail("atomic number", here, "'#' needs an atomic number");
      } else if (c == 'a' && !lower_next) {
        p.kind = Primitive::Kind::aromatic;
        ++pos_;
      } else if (c == 'A' && !(lower_next && chem::atomic_number_of(std::string{c, n}))) {
        p.kind = Primitive::Kind::aliphatic;
        ++pos_;
      } else if (c == 'H' && !(lower_next && chem::atomic_number_of(std::string{c, n}))) {
        ++pos_;
        // "[H]" alone is a hydrogen atom; otherwise H is a hydrogen count.
        if (pred.terms.empty() && pos_ < text_.size() && text_[pos_] == ']') {
          p.kind = Primitive::Kind::element;
          p.value = 1;
        } else {
          p.kind = Primitive::Kind::hydrogen_count;
          p.value = number_or(1);
        }
      } else if (c == 'D' && !(lower_next && chem::atomic_number_of(std::string{c, n}))) {
        ++pos_;
        p.kind = Primitive::Kind::degree;
        p.value = number_or(1);
      } else if (c == 'R' && !(lower_next && chem::atomic_number_of(std::string{c, n}))) {
        ++pos_;
        p.kind = Primitive::Kind::ring;
        p.value = number_or(-1);
      } else if (c == '+' || c == '-') {
        ++pos_;
        p.kind = Primitive::Kind::charge;
        int mag = 1;
        if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
          mag = number_or(1);
        } else {
          while (pos_ < text_.size() && text_[pos_] == c) {
            ++mag;
            ++pos_;
          }
        }
        p.value = c == '+' ? mag : -mag;
      } else if (std::isupper(static_cast<unsigned char>(c))) {
        p.kind = Primitive::Kind::element;
        if (lower_next && chem::atomic_number_of(std::string{c, n})) {
          p.value = *chem::atomic_number_of(std::string{c, n});
          pos_ += 2;
        } else if (auto z = chem::atomic_number_of(std::string{c})) {
          p.value = *z;
          ++pos_;
        } else {
          fail("unknown symbol", here, std::string("unknown element symbol '") + c + "'");
        }
        p.aromatic_flag = false;
      } else if (std::islower(static_cast<unsigned char>(c))) {
        static const std::pair<std::string_view, int> kAromatic[] = {
            {"se", 34}, {"as", 33}, {"b", 5}, {"c", 6}, {"n", 7}, {"o", 8}, {"p", 15}, {"s", 16}};
        bool found = false;
        for (const auto& [sym, z] : kAromatic) {
          if (text_.substr(pos_, sym.size()) == sym) {
            p.kind = Primitive::Kind::element;
            p.value = z;
            p.aromatic_flag = true;
            pos_ += sym.size();
            found = true;
            break;
          }
        }
        if (!found) fail("unknown symbol", here, std::string("unknown aromatic symbol '") + c + "'");
      } else {
        fail("unknown symbol", here, std::string("unexpected character '") + c + "' in bracket atom");
      }
      pred.terms.push_back(p);
      expect_term = false;
    }
    check_satisfiable(pred, open);
    return pred;
  }

  void check_satisfiable(const AtomPredicate& pred, std::size_t pos) const {
    std::set<int> elements;
    for (const auto& t : pred.terms) {
      if (t.kind == Primitive::Kind::element && !t.negated) elements.insert(t.value);
    }
    if (elements.size() > 1) fail("unsatisfiable", pos, "bracket atom requires two different elements");
  }

  void add_atom(AtomPredicate pred) {
    const int idx = static_cast<int>(pattern_.atoms.size());
    pattern_.atoms.push_back(std::move(pred));
    pattern_.adjacency.emplace_back();
    if (prev_ >= 0) connect(prev_, idx, pending_.value_or(BondPredicate::single_or_aromatic));
    pending_.reset();
    prev_ = idx;
  }

  void connect(int a, int b, BondPredicate p) {
    const int bi = static_cast<int>(pattern_.bonds.size());
    pattern_.bonds.push_back({a, b, p});
    pattern_.adjacency[static_cast<std::size_t>(a)].emplace_back(b, bi);
    pattern_.adjacency[static_cast<std::size_t>(b)].emplace_back(a, bi);
  }

  void ring(int number, std::size_t here) {
    if (prev_ < 0) fail("ring closure", here, "ring closure without a preceding atom");
    auto it = rings_.find(number);
    if (it == rings_.end()) {
      rings_[number] = {{prev_, pending_}, here};
      pending_.reset();
      return;
    }
    const auto [open, at] = it->second;
    rings_.erase(it);
    if (open.first == prev_) fail("ring closure", here, "ring closure bonds an atom to itself");
    if (open.second && pending_ && *open.second != *pending_) fail("ring closure", here, "conflicting ring-closure bonds");
    for (const auto& [nb, bi] : pattern_.adjacency[static_cast<std::size_t>(prev_)]) {
      if (nb == open.first) fail("ring closure", here, "ring closure duplicates an existing bond");
    }
    connect(open.first, prev_, open.second ? *open.second : pending_.value_or(BondPredicate::single_or_aromatic));
    pending_.reset();
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  Pattern pattern_;
  int prev_ = -1;
  std::optional<BondPredicate> pending_;
  std::vector<int> branches_;
  std::map<int, std::pair<std::pair<int, std::optional<BondPredicate>>, std::size_t>> rings_;
};

class Matcher {
 public:
  Matcher(const MolecularGraph& g, const Pattern& p) : g_(g), p_(p) {
    const int np = p.atom_count();
    candidates_.resize(static_cast<std::size_t>(np));
    for (int i = 0; i < np; ++i) {
      for (int a = 0; a < g.atom_count(); ++a) {
        if (p.atoms[static_cast<std::size_t>(i)].matches(g, a)) candidates_[static_cast<std::size_t>(i)].push_back(a);
      }
    }
    // Rarest atom first, then always extend from an already-placed neighbor,
    // again preferring the rarest.
    std::vector<bool> placed(static_cast<std::size_t>(np), false);
    auto rarity = [&](int i) { return candidates_[static_cast<std::size_t>(i)].size(); };
    while (static_cast<int>(order_.size()) < np) {
      int best = -1;
      for (int i = 0; i < np; ++i) {
        if (placed[static_cast<std::size_t>(i)]) continue;
        bool frontier = order_.empty();
        for (const auto& [nb, bi] : p.adjacency[static_cast<std::size_t>(i)]) {
          if (placed[static_cast<std::size_t>(nb)]) frontier = true;
        }
        if (!frontier) continue;
        if (best < 0 || rarity(i) < rarity(best)) best = i;
      }
      if (best < 0) {
        // Disconnected remainder (cannot come from the parser); take any.
        for (int i = 0; i < np && best < 0; ++i) {
          if (!placed[static_cast<std::size_t>(i)]) best = i;
        }
      }
      placed[static_cast<std::size_t>(best)] = true;
      order_.push_back(best);
    }
    map_.assign(static_cast<std::size_t>(np), -1);
    used_.assign(static_cast<std::size_t>(g.atom_count()), false);
  }

  // Calls visit(mapping) for each complete mapping; stops when it returns false.
  template <typename Visit>
  void run(Visit&& visit) {
    stop_ = false;
    search(0, visit);
  }

 private:
  template <typename Visit>
  void search(std::size_t depth, Visit& visit) {
    if (stop_) return;
    if (depth == order_.size()) {
      if (!visit(map_)) stop_ = true;
      return;
    }
    const int pi = order_[depth];
    for (int ga : candidates_[static_cast<std::size_t>(pi)]) {
      if (used_[static_cast<std::size_t>(ga)]) continue;
      bool ok = true;
      for (const auto& [nb, bi] : p_.adjacency[static_cast<std::size_t>(pi)]) {
        const int gm = map_[static_cast<std::size_t>(nb)];
        if (gm < 0) continue;
        const auto bond = g_.bond_between(ga, gm);
        if (!bond || !bond_matches(p_.bonds[static_cast<std::size_t>(bi)].predicate, g_.bond(*bond).order)) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      map_[static_cast<std::size_t>(pi)] = ga;
      used_[static_cast<std::size_t>(ga)] = true;
      search(depth + 1, visit);
      map_[static_cast<std::size_t>(pi)] = -1;
      used_[static_cast<std::size_t>(ga)] = false;
      if (stop_) return;
    }
  }

  const MolecularGraph& g_;
  const Pattern& p_;
  std::vector<std::vector<int>> candidates_;
  std::vector<int> order_;
  std::vector<int> map_;
  std::vector<bool> used_;
  bool stop_ = false;
};

}  // namespace

Pattern parse_pattern(std::string_view text, std::string name) { return PatternParser(text, std::move(name)).run(); }

std::vector<std::vector<int>> match_pattern(const MolecularGraph& graph, const Pattern& pattern) {
  std::vector<std::vector<int>> out;
  Matcher(graph, pattern).run([&](const std::vector<int>& m) {
    out.push_back(m);
    return true;
  });
  std::sort(out.begin(), out.end());
  return out;
}

bool has_substructure(const MolecularGraph& graph, const Pattern& pattern) {
  bool found = false;
  Matcher(graph, pattern).run([&](const std::vector<int>&) {
    found = true;
    return false;
  });
  return found;
}

int count_unique_matches(const MolecularGraph& graph, const Pattern& pattern) {
  std::set<std::vector<int>> sets;
  Matcher(graph, pattern).run([&](const std::vector<int>& m) {
    auto s = m;
    std::sort(s.begin(), s.end());
    sets.insert(std::move(s));
    return true;
  });
  return static_cast<int>(sets.size());
}

std::string_view to_string(ListId id) {
  switch (id) {
    case ListId::simple: return "simple";
    case ListId::maccs_like: return "maccs-like";
    case ListId::fragment: return "fragment";
    case ListId::textbook: return "textbook";
  }
  return "?";
}

ListId list_id_from_string(std::string_view text) {
  for (auto id : {ListId::simple, ListId::maccs_like, ListId::fragment, ListId::textbook}) {
    if (to_string(id) == text) return id;
  }
  throw DataError("unknown pattern list id '" + std::string(text) + "'");
}

bool seen_partition(std::string_view name, std::string_view salt) {
  return hash_string(name, hash_string(salt)) % 5 != 0;
}

std::string display_name(std::string_view name) {
  std::string s(name.substr(0, 3) == "fr_" ? name.substr(3) : name);
  std::replace(s.begin(), s.end(), '_', ' ');
  return s;
}

PatternLibrary PatternLibrary::parse(std::string_view text) {
  PatternLibrary lib;
  std::set<std::pair<ListId, std::string>> names;
  std::size_t line_no = 0;
  for (const auto& raw : io::split_lines(text)) {
    ++line_no;
    const auto line = io::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = io::split(raw, '\t');
    if (fields.size() != 4) {
      throw DataError("pattern library line " + std::to_string(line_no) + ": expected 4 tab-separated fields");
    }
    const ListId list = list_id_from_string(fields[2]);
    bool seen;
    if (fields[3] == "seen") {
      seen = true;
    } else if (fields[3] == "unseen") {
      seen = false;
    } else {
      throw DataError("pattern library line " + std::to_string(line_no) + ": last field must be seen or unseen");
    }
    if (!names.insert({list, fields[0]}).second) {
      throw DataError("pattern library line " + std::to_string(line_no) + ": duplicate name '" + fields[0] + "'");
    }
    try {
      lib.entries_.push_back({fields[0], parse_pattern(fields[1], fields[0]), list, seen});
    } catch (const PatternError& e) {
      spdlog::warn("skipping pattern '{}' (line {}): {}", fields[0], line_no, e.what());
      lib.skipped_.push_back({line_no, fields[0], e.construct()});
    }
  }
  return lib;
}

PatternLibrary PatternLibrary::load(const std::string& path) { return parse(io::read_file(path)); }

const PatternLibrary& PatternLibrary::builtin() {
  static const PatternLibrary lib = parse(data::embedded("patterns.tsv"));
  return lib;
}

std::vector<const LibraryEntry*> PatternLibrary::in_list(ListId id) const {
  std::vector<const LibraryEntry*> out;
  for (const auto& e : entries_) {
    if (e.list == id) out.push_back(&e);
  }
  return out;
}

const LibraryEntry* PatternLibrary::find(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

std::map<std::string, int> count_fragments(const MolecularGraph& graph, const PatternLibrary& library) {
  std::map<std::string, int> out;
  for (const auto& e : library.entries()) out.emplace(e.name, count_unique_matches(graph, e.pattern));
  return out;
}

}  // namespace molforge::pattern
