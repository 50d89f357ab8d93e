#pragma once

#include <optional>
#include <span>
#include <string_view>

namespace molforge::chem {

struct ElementInfo {
  int atomic_number;
  std::string_view symbol;
  double mass;                   // standard atomic weight, g/mol
  std::span<const int> valences;  // ascending; empty = no implicit-H model
};

constexpr int kMaxAtomicNumber = 118;

// Throws ArgumentError outside [1, 118].
const ElementInfo& element(int atomic_number);

// Case-sensitive symbol lookup ("Cl", not "CL").
std::optional<int> atomic_number_of(std::string_view symbol);

// Mass of a specific isotope. Light isotopes use a short exact-mass table;
// anything else falls back to the mass number itself.
double isotope_mass(int atomic_number, int mass_number);

}  // namespace molforge::chem
