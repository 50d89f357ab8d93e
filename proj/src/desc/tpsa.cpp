#include <algorithm>
#include <string>

#include "molforge/common/io.hpp"
#include "molforge/data/embedded.hpp"
#include "molforge/desc/descriptors.hpp"

namespace molforge::desc {
namespace {

int parse_int(const std::string& field, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const int value = std::stoi(field, &used);
    if (used == field.size()) return value;
  } catch (const std::exception&) {
  }
  throw DataError("polar surface table line " + std::to_string(line_no) + ": bad integer '" + field + "'");
}

TpsaKey key_of(const chem::MolecularGraph& graph, int atom) {
  TpsaKey key;
  key.element = graph.atom(atom).element;
  key.charge = graph.atom(atom).formal_charge;
  key.hydrogens = graph.total_h(atom);
  for (const auto& nb : graph.neighbors(atom)) {
    if (graph.atom(nb.atom).element == 1) continue;
    switch (graph.bond(nb.bond).order) {
      case chem::BondOrder::single: ++key.single; break;
      case chem::BondOrder::double_: ++key.double_; break;
      case chem::BondOrder::triple: ++key.triple; break;
      case chem::BondOrder::aromatic: ++key.aromatic; break;
    }
  }
  key.in_three_ring = 0;
  for (const auto& ring : graph.rings()) {
    if (ring.size() == 3 && std::find(ring.begin(), ring.end(), atom) != ring.end()) key.in_three_ring = 1;
  }
  return key;
}

}  // namespace

TpsaTable TpsaTable::parse(std::string_view text) {
  TpsaTable table;
  std::size_t line_no = 0;
  for (const auto& raw : io::split_lines(text)) {
    ++line_no;
    const auto line = io::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = io::split(raw, '\t');
    if (fields.size() < 9) {
      throw DataError("polar surface table line " + std::to_string(line_no) + ": expected at least 9 columns");
    }
    TpsaKey key;
    if (fields[0] == "N") key.element = 7;
    else if (fields[0] == "O") key.element = 8;
    else if (fields[0] == "S") key.element = 16;
    else if (fields[0] == "P") key.element = 15;
    else throw DataError("polar surface table line " + std::to_string(line_no) + ": unsupported element " + fields[0]);
    key.charge = parse_int(fields[1], line_no);
    key.hydrogens = parse_int(fields[2], line_no);
    key.single = parse_int(fields[3], line_no);
    key.double_ = parse_int(fields[4], line_no);
    key.triple = parse_int(fields[5], line_no);
    key.aromatic = parse_int(fields[6], line_no);
    key.in_three_ring = fields[7] == "*" ? -1 : parse_int(fields[7], line_no);
    double value = 0;
    try {
      value = std::stod(fields[8]);
    } catch (const std::exception&) {
      throw DataError("polar surface table line " + std::to_string(line_no) + ": bad value '" + fields[8] + "'");
    }
    if (value < 0) throw DataError("polar surface table line " + std::to_string(line_no) + ": negative value");
    table.rows_.emplace_back(key, value);
  }
  for (int element : {7, 8, 15, 16}) {
    const bool present = std::any_of(table.rows_.begin(), table.rows_.end(),
                                     [&](const auto& row) { return row.first.element == element; });
    if (!present) throw DataError("polar surface table has no rows for element " + std::to_string(element));
  }
  return table;
}

const TpsaTable& TpsaTable::builtin() {
  static const TpsaTable kTable = parse(data::embedded("tpsa_contributions.tsv"));
  return kTable;
}

std::optional<double> TpsaTable::lookup(const TpsaKey& key) const {
  for (const auto& [row, value] : rows_) {
    if (row.element == key.element && row.charge == key.charge && row.hydrogens == key.hydrogens &&
        row.single == key.single && row.double_ == key.double_ && row.triple == key.triple &&
        row.aromatic == key.aromatic && (row.in_three_ring < 0 || row.in_three_ring == key.in_three_ring)) {
      return value;
    }
  }
  return std::nullopt;
}

double tpsa(const chem::MolecularGraph& graph, bool include_sulfur_phosphorus) {
  const auto& table = TpsaTable::builtin();
  double total = 0;
  for (int a = 0; a < graph.atom_count(); ++a) {
    const int element = graph.atom(a).element;
    const bool polar = element == 7 || element == 8;
    const bool optional = element == 15 || element == 16;
    if (!polar && !(optional && include_sulfur_phosphorus)) continue;
    const TpsaKey key = key_of(graph, a);
    if (const auto value = table.lookup(key)) {
      total += *value;
      continue;
    }
    // Atoms outside the fragment table: linear estimate in neighbor and
    // hydrogen counts, clamped at zero. S and P have no estimate.
    const int neighbors = key.single + key.double_ + key.triple + key.aromatic;
    double estimate = 0;
    if (element == 7) estimate = 30.5 - 8.2 * neighbors + 1.5 * key.hydrogens;
    if (element == 8) estimate = 28.5 - 8.6 * neighbors + 1.5 * key.hydrogens;
    total += std::max(0.0, estimate);
  }
  return total;
}

}  // namespace molforge::desc
