#include <cctype>
#include <map>
#include <string>

#include "molforge/chem/element.hpp"
#include "molforge/chem/smiles.hpp"

namespace molforge::chem {
namespace {

std::string describe(const std::string& text, const std::vector<ParseDiagnostics>& diags) {
  for (const auto& d : diags) {
    if (d.severity == Severity::error) {
      return "invalid SMILES '" + text + "' at offset " + std::to_string(d.position) + ": " + d.message;
    }
  }
  return "invalid SMILES '" + text + "'";
}

struct Failure {
  std::size_t position;
  std::string message;
};

struct RingOpening {
  int atom;
  std::optional<BondOrder> order;
  std::size_t position;
  std::size_t ref_slot;  // index into the opening atom's stereo_refs
};

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ParseResult run() {
    ParseResult result;
    try {
      parse();
      auto graph = std::move(builder_).build(std::string(text_));
      for (const auto& w : graph.warnings()) {
        // Builder warnings carry no text offset.
        ParseDiagnostics d = w;
        d.position = 0;
        result.diagnostics.push_back(d);
      }
      for (auto& w : warnings_) result.diagnostics.push_back(std::move(w));
      result.graph = std::move(graph);
    } catch (const Failure& f) {
      result.diagnostics.push_back({f.position, f.message, Severity::error});
      for (auto& w : warnings_) result.diagnostics.push_back(std::move(w));
    }
    return result;
  }

 private:
  [[noreturn]] void fail(std::size_t pos, std::string message) const {
    throw Failure{pos < text_.size() ? pos : (text_.empty() ? 0 : text_.size() - 1), std::move(message)};
  }

  bool at_end() const { return pos_ >= text_.size() || std::isspace(static_cast<unsigned char>(text_[pos_])); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  void parse() {
    if (text_.empty() || at_end()) fail(0, "empty SMILES");
    while (!at_end()) {
      const char c = peek();
      const std::size_t here = pos_;
      switch (c) {
        case '-': case '=': case '#': case ':': case '/': case '\\':
          if (pending_bond_) fail(here, "two bond symbols in a row");
          if (prev_ < 0) fail(here, "bond symbol without a preceding atom");
          pending_bond_ = bond_from_symbol(c, here);
          pending_pos_ = here;
          ++pos_;
          break;
        case '$':
          fail(here, "quadruple bonds are not supported");
        case '(':
          if (prev_ < 0) fail(here, "branch without a preceding atom");
          if (pending_bond_) fail(here, "bond symbol before '('");
          branches_.push_back({prev_, here});
          ++pos_;
          break;
        case ')':
          if (branches_.empty()) fail(here, "unbalanced parenthesis: unmatched ')'");
          if (pending_bond_) fail(here, "bond symbol before ')'");
          prev_ = branches_.back().first;
          branches_.pop_back();
          ++pos_;
          break;
        case '.':
          if (pending_bond_) fail(here, "bond symbol before '.'");
          if (!branches_.empty()) fail(here, "'.' inside a branch");
          prev_ = -1;
          ++pos_;
          break;
        case '%': {
          if (!std::isdigit(static_cast<unsigned char>(peek(1))) || !std::isdigit(static_cast<unsigned char>(peek(2)))) {
            fail(here, "'%' must be followed by two digits");
          }
          const int number = (peek(1) - '0') * 10 + (peek(2) - '0');
          pos_ += 3;
          ring_bond(number, here);
          break;
        }
        case '[':
          add_atom(parse_bracket(), here);
          break;
        case '*':
          fail(here, "wildcard atoms are not supported in molecules");
        default:
          if (std::isdigit(static_cast<unsigned char>(c))) {
            ++pos_;
            ring_bond(c - '0', here);
          } else if (std::isalpha(static_cast<unsigned char>(c))) {
            add_atom(parse_organic(), here);
          } else {
            fail(here, std::string("unexpected character '") + c + "'");
          }
      }
    }
    if (pending_bond_) fail(pending_pos_, "bond symbol at end of input");
    if (!branches_.empty()) fail(branches_.back().second, "unbalanced parenthesis: unclosed '('");
    if (!rings_.empty()) {
      std::size_t first = text_.size();
      for (const auto& [digit, open] : rings_) first = std::min(first, open.position);
      fail(first, "unclosed ring closure");
    }
  }

  BondOrder bond_from_symbol(char c, std::size_t here) {
    switch (c) {
      case '-': return BondOrder::single;
      case '=': return BondOrder::double_;
      case '#': return BondOrder::triple;
      case ':': return BondOrder::aromatic;
      default:
        if (!warned_directional_) {
          warnings_.push_back({here, "directional bond read as single; double-bond stereo is dropped", Severity::warning});
          warned_directional_ = true;
        }
        return BondOrder::single;
    }
  }

  Atom parse_organic() {
    const std::size_t here = pos_;
    const char c = peek();
    const char n = peek(1);
    Atom atom;
    if (c == 'C' && n == 'l') {
      atom.element = 17;
      pos_ += 2;
      return atom;
    }
    if (c == 'B' && n == 'r') {
      atom.element = 35;
      pos_ += 2;
      return atom;
    }
    ++pos_;
    switch (c) {
      case 'B': atom.element = 5; break;
      case 'C': atom.element = 6; break;
      case 'N': atom.element = 7; break;
      case 'O': atom.element = 8; break;
      case 'P': atom.element = 15; break;
      case 'S': atom.element = 16; break;
      case 'F': atom.element = 9; break;
      case 'I': atom.element = 53; break;
      case 'b': atom.element = 5; atom.aromatic = true; break;
      case 'c': atom.element = 6; atom.aromatic = true; break;
      case 'n': atom.element = 7; atom.aromatic = true; break;
      case 'o': atom.element = 8; atom.aromatic = true; break;
      case 'p': atom.element = 15; atom.aromatic = true; break;
      case 's': atom.element = 16; atom.aromatic = true; break;
      default:
        fail(here, std::string("unknown element symbol '") + c + "' (outside brackets only the organic subset is allowed)");
    }
    return atom;
  }

  int read_number() {
    int value = 0;
    int digits = 0;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      value = value * 10 + (peek() - '0');
      ++pos_;
      if (++digits > 4) fail(pos_, "number too long");
    }
    return digits == 0 ? -1 : value;
  }

  Atom parse_bracket() {
    const std::size_t open = pos_;
    ++pos_;  // '['
    Atom atom;
    const int isotope = read_number();
    if (isotope >= 0) atom.isotope = isotope;

    const std::size_t sym_pos = pos_;
    if (peek() == '*') fail(sym_pos, "wildcard atoms are not supported in molecules");
    if (!std::isalpha(static_cast<unsigned char>(peek()))) fail(sym_pos, "expected element symbol in bracket atom");
    if (std::islower(static_cast<unsigned char>(peek()))) {
      static const std::pair<std::string_view, int> kAromatic[] = {
          {"se", 34}, {"as", 33}, {"te", 52}, {"b", 5}, {"c", 6}, {"n", 7}, {"o", 8}, {"p", 15}, {"s", 16}};
      bool matched = false;
      for (const auto& [sym, z] : kAromatic) {
        if (text_.substr(pos_, sym.size()) == sym) {
          atom.element = z;
          atom.aromatic = true;
          pos_ += sym.size();
          matched = true;
          break;
        }
      }
      if (!matched) fail(sym_pos, "unknown aromatic element symbol");
    } else {
      std::string two{peek(), peek(1)};
      std::string one{peek()};
      if (std::islower(static_cast<unsigned char>(peek(1))) && atomic_number_of(two)) {
        atom.element = *atomic_number_of(two);
        pos_ += 2;
      } else if (auto z = atomic_number_of(one)) {
        atom.element = *z;
        pos_ += 1;
      } else {
        fail(sym_pos, "unknown element symbol '" + (std::islower(static_cast<unsigned char>(peek(1))) ? two : one) + "'");
      }
    }

    if (peek() == '@') {
      ++pos_;
      if (peek() == '@') {
        ++pos_;
        atom.chirality = Chirality::clockwise;
      } else if (std::isupper(static_cast<unsigned char>(peek())) && peek() != 'H') {
        fail(pos_, "extended stereo classes (@TH, @AL, @SP, @TB, @OH) are not supported");
      } else {
        atom.chirality = Chirality::counterclockwise;
      }
    }

    int h = 0;
    if (peek() == 'H') {
      ++pos_;
      const int count = read_number();
      h = count < 0 ? 1 : count;
    }
    atom.explicit_h = h;

    if (peek() == '+' || peek() == '-') {
      const char sign = peek();
      const std::size_t charge_pos = pos_;
      ++pos_;
      int magnitude = 1;
      if (std::isdigit(static_cast<unsigned char>(peek()))) {
        magnitude = read_number();
        if (magnitude > 15) fail(charge_pos, "charge magnitude too large");
      } else {
        while (peek() == sign) {
          ++magnitude;
          ++pos_;
        }
      }
      if (peek() == '+' || peek() == '-') fail(pos_, "malformed charge");
      atom.formal_charge = sign == '+' ? magnitude : -magnitude;
    }

    if (peek() == ':') {
      ++pos_;
      if (read_number() < 0) fail(pos_, "atom class requires digits");
    }
    if (peek() == 'H') fail(pos_, "hydrogen count must precede the charge");
    if (peek() != ']') {
      if (pos_ >= text_.size()) fail(open, "unterminated bracket atom");
      fail(pos_, std::string("unexpected character '") + peek() + "' in bracket atom");
    }
    ++pos_;
    return atom;
  }

  BondOrder default_order(int a, int b) {
    return builder_.atom(a).aromatic && builder_.atom(b).aromatic ? BondOrder::aromatic : BondOrder::single;
  }

  void add_atom(Atom atom, std::size_t here) {
    const bool has_h_ref = atom.explicit_h.value_or(0) > 0;
    const int idx = builder_.add_atom(std::move(atom));
    if (prev_ >= 0) {
      const BondOrder order = pending_bond_.value_or(default_order(prev_, idx));
      builder_.add_bond(prev_, idx, order);
      builder_.atom(idx).stereo_refs.push_back(prev_);
      builder_.atom(prev_).stereo_refs.push_back(idx);
    }
    if (has_h_ref) builder_.atom(idx).stereo_refs.push_back(kImplicitHydrogen);
    (void)here;
    pending_bond_.reset();
    prev_ = idx;
  }

  void ring_bond(int number, std::size_t here) {
    if (prev_ < 0) fail(here, "ring closure without a preceding atom");
    auto it = rings_.find(number);
    if (it == rings_.end()) {
      auto& refs = builder_.atom(prev_).stereo_refs;
      refs.push_back(-2);
      rings_[number] = {prev_, pending_bond_, here, refs.size() - 1};
      pending_bond_.reset();
      return;
    }
    const RingOpening open = it->second;
    rings_.erase(it);
    if (open.atom == prev_) fail(here, "ring closure bonds an atom to itself");
    if (open.order && pending_bond_ && *open.order != *pending_bond_) {
      fail(here, "conflicting bond orders on ring closure");
    }
    const BondOrder order = open.order ? *open.order : pending_bond_.value_or(default_order(open.atom, prev_));
    if (builder_.bond_between(open.atom, prev_)) fail(here, "ring closure duplicates an existing bond");
    builder_.add_bond(open.atom, prev_, order);
    builder_.atom(open.atom).stereo_refs[open.ref_slot] = prev_;
    builder_.atom(prev_).stereo_refs.push_back(open.atom);
    pending_bond_.reset();
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  GraphBuilder builder_;
  int prev_ = -1;
  std::optional<BondOrder> pending_bond_;
  std::size_t pending_pos_ = 0;
  std::vector<std::pair<int, std::size_t>> branches_;
  std::map<int, RingOpening> rings_;
  std::vector<ParseDiagnostics> warnings_;
  bool warned_directional_ = false;
};

}  // namespace

SmilesError::SmilesError(std::string text, std::vector<ParseDiagnostics> diagnostics)
    : DataError(describe(text, diagnostics)), diagnostics_(std::move(diagnostics)) {}

ParseResult try_parse_smiles(std::string_view text) { return Parser(text).run(); }

MolecularGraph parse_smiles(std::string_view text) {
  ParseResult result = try_parse_smiles(text);
  if (!result.ok()) throw SmilesError(std::string(text), std::move(result.diagnostics));
  return std::move(*result.graph);
}

}  // namespace molforge::chem
