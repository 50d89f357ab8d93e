#include "molforge/chem/element.hpp"

#include <array>
#include <string>

#include "molforge/common/error.hpp"

namespace molforge::chem {
namespace {

constexpr std::array<int, 1> kV1{1};
constexpr std::array<int, 1> kV2{2};
constexpr std::array<int, 1> kV3{3};
constexpr std::array<int, 1> kV4{4};
constexpr std::array<int, 2> kV35{3, 5};
constexpr std::array<int, 3> kV246{2, 4, 6};

// Standard atomic weights (IUPAC abridged values as distributed with common
// cheminformatics toolkits). Valence lists only for the SMILES organic subset
// plus the heavier chalcogen/pnictogen/tetrel analogues that may be written
// aromatic in brackets.
const std::array<ElementInfo, kMaxAtomicNumber> kElements{{
    {1, "H", 1.008, kV1},
    {2, "He", 4.003, {}},
    {3, "Li", 6.941, {}},
    {4, "Be", 9.012, {}},
    {5, "B", 10.812, kV3},
    {6, "C", 12.011, kV4},
    {7, "N", 14.007, kV35},
    {8, "O", 15.999, kV2},
    {9, "F", 18.998, kV1},
    {10, "Ne", 20.18, {}},
    {11, "Na", 22.99, {}},
    {12, "Mg", 24.305, {}},
    {13, "Al", 26.982, {}},
    {14, "Si", 28.086, kV4},
    {15, "P", 30.974, kV35},
    {16, "S", 32.067, kV246},
    {17, "Cl", 35.453, kV1},
    {18, "Ar", 39.948, {}},
    {19, "K", 39.098, {}},
    {20, "Ca", 40.078, {}},
    {21, "Sc", 44.956, {}},
    {22, "Ti", 47.867, {}},
    {23, "V", 50.944, {}},
    {24, "Cr", 51.996, {}},
    {25, "Mn", 54.938, {}},
    {26, "Fe", 55.845, {}},
    {27, "Co", 58.933, {}},
    {28, "Ni", 58.693, {}},
    {29, "Cu", 63.546, {}},
    {30, "Zn", 65.39, {}},
    {31, "Ga", 69.723, {}},
    {32, "Ge", 72.61, {}},
    {33, "As", 74.922, kV35},
    {34, "Se", 78.96, kV246},
    {35, "Br", 79.904, kV1},
    {36, "Kr", 83.8, {}},
    {37, "Rb", 85.468, {}},
    {38, "Sr", 87.62, {}},
    {39, "Y", 88.906, {}},
    {40, "Zr", 91.224, {}},
    {41, "Nb", 92.906, {}},
    {42, "Mo", 95.94, {}},
    {43, "Tc", 98.0, {}},
    {44, "Ru", 101.07, {}},
    {45, "Rh", 102.906, {}},
    {46, "Pd", 106.42, {}},
    {47, "Ag", 107.868, {}},
    {48, "Cd", 112.412, {}},
    {49, "In", 114.818, {}},
    {50, "Sn", 118.711, {}},
    {51, "Sb", 121.76, {}},
    {52, "Te", 127.6, {}},
    {53, "I", 126.904, kV1},
    {54, "Xe", 131.29, {}},
    {55, "Cs", 132.905, {}},
    {56, "Ba", 137.328, {}},
    {57, "La", 138.906, {}},
    {58, "Ce", 140.116, {}},
    {59, "Pr", 140.908, {}},
    {60, "Nd", 144.24, {}},
    {61, "Pm", 145.0, {}},
    {62, "Sm", 150.36, {}},
    {63, "Eu", 151.964, {}},
    {64, "Gd", 157.25, {}},
    {65, "Tb", 158.925, {}},
    {66, "Dy", 162.5, {}},
    {67, "Ho", 164.93, {}},
    {68, "Er", 167.26, {}},
    {69, "Tm", 168.934, {}},
    {70, "Yb", 173.04, {}},
    {71, "Lu", 174.967, {}},
    {72, "Hf", 178.49, {}},
    {73, "Ta", 180.948, {}},
    {74, "W", 183.84, {}},
    {75, "Re", 186.207, {}},
    {76, "Os", 190.23, {}},
    {77, "Ir", 192.217, {}},
    {78, "Pt", 195.078, {}},
    {79, "Au", 196.967, {}},
    {80, "Hg", 200.59, {}},
    {81, "Tl", 204.383, {}},
    {82, "Pb", 207.2, {}},
    {83, "Bi", 208.98, {}},
    {84, "Po", 209.0, {}},
    {85, "At", 210.0, {}},
    {86, "Rn", 222.0, {}},
    {87, "Fr", 223.0, {}},
    {88, "Ra", 226.0, {}},
    {89, "Ac", 227.0, {}},
    {90, "Th", 232.038, {}},
    {91, "Pa", 231.036, {}},
    {92, "U", 238.029, {}},
    {93, "Np", 237.0, {}},
    {94, "Pu", 244.0, {}},
    {95, "Am", 243.0, {}},
    {96, "Cm", 247.0, {}},
    {97, "Bk", 247.0, {}},
    {98, "Cf", 251.0, {}},
    {99, "Es", 252.0, {}},
    {100, "Fm", 257.0, {}},
    {101, "Md", 258.0, {}},
    {102, "No", 259.0, {}},
    {103, "Lr", 262.0, {}},
    {104, "Rf", 267.0, {}},
    {105, "Db", 268.0, {}},
    {106, "Sg", 269.0, {}},
    {107, "Bh", 270.0, {}},
    {108, "Hs", 269.0, {}},
    {109, "Mt", 278.0, {}},
    {110, "Ds", 281.0, {}},
    {111, "Rg", 281.0, {}},
    {112, "Cn", 285.0, {}},
    {113, "Nh", 284.0, {}},
    {114, "Fl", 289.0, {}},
    {115, "Mc", 288.0, {}},
    {116, "Lv", 293.0, {}},
    {117, "Ts", 292.0, {}},
    {118, "Og", 294.0, {}},
}};

struct IsotopeMass {
  int z;
  int mass_number;
  double mass;
};

constexpr std::array<IsotopeMass, 9> kIsotopes{{
    {1, 1, 1.008},   {1, 2, 2.014},   {1, 3, 3.016},   {6, 12, 12.000}, {6, 13, 13.003},
    {6, 14, 14.003}, {7, 15, 15.000}, {8, 17, 16.999}, {8, 18, 17.999},
}};

}  // namespace

const ElementInfo& element(int atomic_number) {
  if (atomic_number < 1 || atomic_number > kMaxAtomicNumber) {
    throw ArgumentError("atomic number out of range: " + std::to_string(atomic_number));
  }
  return kElements[static_cast<std::size_t>(atomic_number - 1)];
}

std::optional<int> atomic_number_of(std::string_view symbol) {
  for (const auto& e : kElements) {
    if (e.symbol == symbol) return e.atomic_number;
  }
  return std::nullopt;
}

double isotope_mass(int atomic_number, int mass_number) {
  for (const auto& iso : kIsotopes) {
    if (iso.z == atomic_number && iso.mass_number == mass_number) return iso.mass;
  }
  return static_cast<double>(mass_number);
}

}  // namespace molforge::chem
