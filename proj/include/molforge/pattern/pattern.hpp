#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "molforge/chem/graph.hpp"
#include "molforge/common/error.hpp"

namespace molforge::pattern {

class PatternError : public DataError {
 public:
  PatternError(std::string construct, std::size_t position, const std::string& message);
  // Short name of the offending construct, e.g. "X primitive", "OR-list".
  const std::string& construct() const { return construct_; }
  std::size_t position() const { return position_; }

 private:
  std::string construct_;
  std::size_t position_;
};

struct Primitive {
  enum class Kind : std::uint8_t {
    any,            // *
    element,        // value = Z; aromatic_flag constrains aromaticity when set
    aromatic,       // a
    aliphatic,      // A
    hydrogen_count, // H<n>, total hydrogens
    degree,         // D<n>, explicit connections
    ring,           // R (value < 0) or R<n> ring-membership count
    charge,
  };
  Kind kind = Kind::any;
  int value = 0;
  std::optional<bool> aromatic_flag;
  bool negated = false;
};

// Conjunction of primitives.
struct AtomPredicate {
  std::vector<Primitive> terms;
  bool matches(const chem::MolecularGraph& graph, int atom) const;
};

enum class BondPredicate : std::uint8_t { single, double_, triple, aromatic, any, single_or_aromatic };

bool bond_matches(BondPredicate predicate, chem::BondOrder order);

struct PatternBond {
  int begin;
  int end;
  BondPredicate predicate;
};

struct Pattern {
  std::string name;
  std::string source;
  std::vector<AtomPredicate> atoms;
  std::vector<PatternBond> bonds;
  std::vector<std::vector<std::pair<int, int>>> adjacency;  // (atom, bond index)

  int atom_count() const { return static_cast<int>(atoms.size()); }
  bool has_wildcard() const;
};

// SMARTS subset: organic-subset symbols (upper = aliphatic, lower = aromatic),
// *, a, A; brackets with #n, element symbols, H<n>, D<n>, R/R<n>, charge,
// '!' negation and '&'/';' conjunction; bonds - = # : ~; branches; ring
// closures. Unspecified bonds mean single or aromatic. Throws PatternError.
Pattern parse_pattern(std::string_view text, std::string name = {});

// Every injective mapping (index = pattern atom), sorted lexicographically.
std::vector<std::vector<int>> match_pattern(const chem::MolecularGraph& graph, const Pattern& pattern);

bool has_substructure(const chem::MolecularGraph& graph, const Pattern& pattern);

// Distinct matched atom sets.
int count_unique_matches(const chem::MolecularGraph& graph, const Pattern& pattern);

enum class ListId : std::uint8_t { simple, maccs_like, fragment, textbook };

std::string_view to_string(ListId id);
ListId list_id_from_string(std::string_view text);

struct LibraryEntry {
  std::string name;
  Pattern pattern;
  ListId list;
  bool seen = true;
};

struct SkippedEntry {
  std::size_t line;
  std::string name;
  std::string reason;
};

// Seen/unseen split: about 80% of names land in "seen" for a given salt.
constexpr std::string_view kDefaultPartitionSalt = "molforge-seen-v1";
bool seen_partition(std::string_view name, std::string_view salt = kDefaultPartitionSalt);

// Name as it reads inside a question ("fr_furan" -> "furan").
std::string display_name(std::string_view name);

class PatternLibrary {
 public:
  // Lines: name<TAB>pattern<TAB>list_id<TAB>seen|unseen; '#' comments.
  // Unsupported patterns are skipped and reported; structural problems throw.
  static PatternLibrary parse(std::string_view text);
  static PatternLibrary load(const std::string& path);
  // The shipped library.
  static const PatternLibrary& builtin();

  const std::vector<LibraryEntry>& entries() const { return entries_; }
  const std::vector<SkippedEntry>& skipped() const { return skipped_; }
  std::vector<const LibraryEntry*> in_list(ListId id) const;
  // First entry with this name in any list.
  const LibraryEntry* find(std::string_view name) const;

 private:
  std::vector<LibraryEntry> entries_;
  std::vector<SkippedEntry> skipped_;
};

// name -> unique match count for every entry in the library.
std::map<std::string, int> count_fragments(const chem::MolecularGraph& graph, const PatternLibrary& library);

}  // namespace molforge::pattern
