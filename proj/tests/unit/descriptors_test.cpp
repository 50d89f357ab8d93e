#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "molforge/chem/molgen.hpp"
#include "molforge/chem/smiles.hpp"
#include "molforge/desc/descriptors.hpp"

namespace molforge::desc {
namespace {

using chem::parse_smiles;

double value_of(const std::string& smiles, const std::string& name) {
  const std::vector<DescriptorSpec> specs{descriptor_spec(name)};
  return compute_descriptors(parse_smiles(smiles), specs).values.at(name);
}

TEST(Catalog, NamesUniqueAndComplete) {
  const auto& catalog = descriptor_catalog();
  std::set<std::string> names;
  for (const auto& spec : catalog) EXPECT_TRUE(names.insert(spec.name).second) << spec.name;
  for (const char* name : {"MolWt", "HeavyAtomCount", "NumHDonors", "NumHAcceptors", "TPSA", "MolLogP",
                           "NumRotatableBonds", "RingCount", "NumAromaticRings", "FractionCSP3", "NumHeteroatoms",
                           "NumAtomStereoCenters", "fr_COO", "fr_lactam"}) {
    EXPECT_TRUE(names.contains(name)) << name;
  }
  EXPECT_EQ(descriptor_spec("FractionCSP3").kind, DescriptorKind::real);
  EXPECT_EQ(descriptor_spec("RingCount").kind, DescriptorKind::integer);
}

TEST(Catalog, UnknownNameListsValidNames) {
  try {
    descriptor_spec("LabuteASA");
    FAIL() << "expected ArgumentError";
  } catch (const ArgumentError& e) {
    const std::string message = e.what();
    EXPECT_NE(message.find("LabuteASA"), std::string::npos);
    EXPECT_NE(message.find("MolWt"), std::string::npos);
    EXPECT_NE(message.find("NumAtomStereoCenters"), std::string::npos);
  }
}

TEST(ComputeDescriptors, Examples) {
  EXPECT_EQ(value_of("CCO", "HeavyAtomCount"), 3);
  EXPECT_EQ(value_of("c1ccccc1", "NumAromaticRings"), 1);
  EXPECT_EQ(value_of("c1ccccc1", "RingCount"), 1);
  EXPECT_EQ(value_of("CC(N)C(=O)O", "NumHDonors"), 2);
  EXPECT_EQ(value_of("CC(N)C(=O)O", "NumHAcceptors"), 3);
}

TEST(ComputeDescriptors, KeepsRequestedEntriesOnly) {
  const std::vector<std::string> names{"TPSA", "fr_COO"};
  const auto vec = compute_descriptors(parse_smiles("OCC(=O)O"), descriptor_specs(names));
  EXPECT_EQ(vec.values.size(), 2u);
  EXPECT_EQ(vec.values.at("fr_COO"), 1);
  EXPECT_EQ(vec.molecule, chem::write_smiles(parse_smiles("OC(=O)CO")));
}

// Oracle: standard atomic weights C 12.011, H 1.008, O 15.999 and the
// deuterium mass 2.014.
TEST(MolWeight, MassTableSums) {
  EXPECT_NEAR(mol_weight(parse_smiles("C")), 12.011 + 4 * 1.008, 1e-9);
  EXPECT_NEAR(mol_weight(parse_smiles("C")), 16.043, 1e-3);
  EXPECT_NEAR(mol_weight(parse_smiles("O")), 18.015, 1e-3);
  EXPECT_NEAR(mol_weight(parse_smiles("[2H]O[2H]")), 15.999 + 2 * 2.014, 1e-3);
  EXPECT_NEAR(mol_weight(parse_smiles("[2H]O[2H]")), 20.028, 1e-3);
  // Explicit hydrogen atoms weigh the same as implicit ones.
  EXPECT_NEAR(mol_weight(parse_smiles("[H]O[H]")), mol_weight(parse_smiles("O")), 1e-9);
}

// Oracle values are the published fragment contributions: hydroxyl O 20.23,
// aromatic n 12.89, nitrile N 23.79, nitro N+ 3.01 + O= 17.07 + O- 23.06.
TEST(Tpsa, FragmentTableOracle) {
  EXPECT_EQ(tpsa(parse_smiles("c1ccccc1")), 0.0);
  EXPECT_NEAR(tpsa(parse_smiles("CCO")), 20.23, 1e-9);
  EXPECT_EQ(tpsa(parse_smiles("CCO")), tpsa(parse_smiles("OCC")));
  EXPECT_NEAR(tpsa(parse_smiles("c1ccncc1")), 12.89, 1e-9);
  EXPECT_NEAR(tpsa(parse_smiles("CC#N")), 23.79, 1e-9);
  EXPECT_NEAR(tpsa(parse_smiles("c1ccccc1[N+](=O)[O-]")), 3.01 + 17.07 + 23.06, 1e-9);
  EXPECT_NEAR(tpsa(parse_smiles("c1cc[nH]c1")), 15.79, 1e-9);
  EXPECT_NEAR(tpsa(parse_smiles("C1CO1")), 12.53, 1e-9);
  EXPECT_NEAR(tpsa(parse_smiles("COC")), 9.23, 1e-9);
}

TEST(Tpsa, FallbackAndSulfurPhosphorus) {
  // Water has no table row: 28.5 - 8.6 * 0 + 1.5 * 2.
  EXPECT_NEAR(tpsa(parse_smiles("O")), 31.5, 1e-9);
  EXPECT_EQ(tpsa(parse_smiles("CSC")), 0.0);
  EXPECT_NEAR(tpsa(parse_smiles("CSC"), true), 25.30, 1e-9);
  EXPECT_NEAR(tpsa(parse_smiles("c1ccsc1"), true), 28.24, 1e-9);
}

TEST(Tpsa, TableValidation) {
  EXPECT_THROW(TpsaTable::parse("N\t0\t0\t3\t0\t0\t0\t0\t3.24\n"), DataError);  // no O, S, P rows
  EXPECT_THROW(TpsaTable::parse("X\t0\t0\t3\t0\t0\t0\t0\t1\n"), DataError);
  EXPECT_THROW(TpsaTable::parse("N\t0\t0\t3\n"), DataError);
  EXPECT_GE(TpsaTable::builtin().size(), 40u);
}

// Oracle: methane is one C1 carbon plus four H1 hydrogens; the published
// values are 0.1441 and 0.1230.
TEST(Crippen, MethaneFromTable) {
  const auto& table = CrippenTable::builtin();
  EXPECT_DOUBLE_EQ(table.logp("C1"), 0.1441);
  EXPECT_DOUBLE_EQ(table.logp("H1"), 0.123);
  EXPECT_NEAR(crippen_logp(parse_smiles("C")), table.logp("C1") + 4 * table.logp("H1"), 1e-12);
  EXPECT_NEAR(crippen_logp(parse_smiles("C")), 0.6361, 1e-9);
}

TEST(Crippen, AtomTypes) {
  auto types_of = [](const std::string& smiles) { return crippen_atom_types(parse_smiles(smiles)); };
  const auto ethanol = types_of("CCO");
  EXPECT_EQ(ethanol.atom_types, (std::vector<std::string>{"C1", "C3", "O2"}));
  EXPECT_EQ(ethanol.implicit_h_types, (std::vector<std::string>{"H1", "H1", "H2"}));
  const auto acid = types_of("CC(=O)O");
  EXPECT_EQ(acid.atom_types, (std::vector<std::string>{"C1", "C5", "O9", "O2"}));
  EXPECT_EQ(acid.implicit_h_types[3], "H4");
  const auto pyrrole = types_of("c1cc[nH]c1");
  EXPECT_EQ(pyrrole.atom_types[3], "N11");
  EXPECT_EQ(pyrrole.implicit_h_types[3], "H3");
  EXPECT_EQ(pyrrole.atom_types[0], "C18");
  EXPECT_EQ(types_of("CC#N").atom_types, (std::vector<std::string>{"C1", "C7", "N9"}));
  EXPECT_EQ(types_of("c1ccccc1Cl").atom_types[5], "C15");
  EXPECT_EQ(types_of("[Na+]").atom_types[0], "Hal");
  EXPECT_EQ(types_of("C[NH3+]").atom_types[1], "N10");
}

TEST(Crippen, UnmatchedAtomsReportDiagnostics) {
  std::vector<std::string> diagnostics;
  const double value = crippen_logp(parse_smiles("[He]"), &diagnostics);
  EXPECT_EQ(value, 0.0);
  ASSERT_EQ(diagnostics.size(), 1u);
  EXPECT_NE(diagnostics[0].find("He"), std::string::npos);
}

TEST(Crippen, OrderingAndTableValidation) {
  EXPECT_GT(crippen_logp(parse_smiles("CCCC")), crippen_logp(parse_smiles("CCO")));
  EXPECT_THROW(CrippenTable::parse("C1\t0.1441\t2.503\n"), DataError);
  EXPECT_THROW(CrippenTable::parse("C1\tabc\n"), DataError);
  for (auto name : crippen_type_names()) EXPECT_TRUE(CrippenTable::builtin().entries().contains(name)) << name;
}

TEST(HBond, Examples) {
  auto counts = [](const std::string& s) {
    const auto c = h_bond_counts(parse_smiles(s));
    return std::pair{c.donors, c.acceptors};
  };
  EXPECT_EQ(counts("CCO"), std::pair(1, 1));
  EXPECT_EQ(counts("CC(=O)NC"), std::pair(1, 2));
  EXPECT_EQ(counts("CCCC"), std::pair(0, 0));
}

TEST(RotatableBonds, Examples) {
  EXPECT_EQ(rotatable_bonds(parse_smiles("CCCC")), 1);
  EXPECT_EQ(rotatable_bonds(parse_smiles("C1CCCCC1")), 0);
  EXPECT_EQ(rotatable_bonds(parse_smiles("CC(=O)NC")), 0);
}

TEST(StereoCenters, TaggedAtomsOnly) {
  EXPECT_EQ(stereo_centers(parse_smiles("C[C@H](N)C(=O)O")), 1);
  EXPECT_EQ(stereo_centers(parse_smiles("CCO")), 0);
  EXPECT_EQ(stereo_centers(chem::strip_stereo(parse_smiles("C[C@H](N)[C@@H](O)C(=O)O"))), 0);
}

// Hand counts for ten molecules: donors, acceptors, rotatable bonds, rings,
// aromatic rings. Ethyl benzoate rotates about CH2-O, O-C(=O) and C(=O)-c.
TEST(HandGoldens, TenMolecules) {
  struct Row {
    const char* smiles;
    int donors, acceptors, rotatable, rings, aromatic_rings;
  };
  const Row rows[] = {
      {"CCO", 1, 1, 0, 0, 0},
      {"CCCC", 0, 0, 1, 0, 0},
      {"CC(=O)NC", 1, 2, 0, 0, 0},
      {"CC(N)C(=O)O", 2, 3, 1, 0, 0},
      {"c1ccc[nH]1", 1, 0, 0, 1, 1},
      {"c1ccncc1", 0, 1, 0, 1, 1},
      {"CCOC(=O)c1ccccc1", 0, 2, 3, 1, 1},
      {"c1ccc2ccccc2c1", 0, 0, 0, 2, 2},
      {"CN1CCN(C)CC1", 0, 2, 0, 1, 0},
      {"NC(=O)N", 2, 3, 0, 0, 0},
  };
  for (const auto& row : rows) {
    SCOPED_TRACE(row.smiles);
    const auto graph = parse_smiles(row.smiles);
    const auto hb = h_bond_counts(graph);
    EXPECT_EQ(hb.donors, row.donors);
    EXPECT_EQ(hb.acceptors, row.acceptors);
    EXPECT_EQ(rotatable_bonds(graph), row.rotatable);
    EXPECT_EQ(ring_count(graph), row.rings);
    EXPECT_EQ(aromatic_ring_count(graph), row.aromatic_rings);
  }
}

TEST(OtherCounts, Examples) {
  EXPECT_EQ(fraction_csp3(parse_smiles("CCO")), 1.0);
  EXPECT_EQ(fraction_csp3(parse_smiles("c1ccccc1")), 0.0);
  EXPECT_EQ(fraction_csp3(parse_smiles("O")), 0.0);
  EXPECT_NEAR(fraction_csp3(parse_smiles("CCOC(=O)c1ccccc1")), 2.0 / 9.0, 1e-12);
  EXPECT_EQ(heteroatom_count(parse_smiles("CC(N)C(=O)O")), 3);
  EXPECT_EQ(heavy_atom_count(parse_smiles("[H]OC")), 2);
}

std::vector<std::string> additive_names() {
  std::vector<std::string> names;
  for (const auto& spec : descriptor_catalog()) {
    if (spec.name != "FractionCSP3") names.push_back(spec.name);
  }
  return names;
}

TEST(Properties, AdditiveOverFragments) {
  Rng rng(20261019);
  const auto specs = descriptor_specs(additive_names());
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = chem::random_molecule(rng);
    const auto b = chem::random_molecule(rng);
    const auto joined = parse_smiles(chem::write_smiles(a) + "." + chem::write_smiles(b));
    const auto va = compute_descriptors(a, specs);
    const auto vb = compute_descriptors(b, specs);
    const auto vj = compute_descriptors(joined, specs);
    for (const auto& spec : specs) {
      EXPECT_NEAR(vj.values.at(spec.name), va.values.at(spec.name) + vb.values.at(spec.name), 1e-9)
          << spec.name << " " << vj.molecule;
    }
  }
}

TEST(Properties, RelabelInvariantAndWellFormed) {
  Rng rng(77);
  const auto& specs = descriptor_catalog();
  for (int trial = 0; trial < 100; ++trial) {
    const auto graph = chem::random_molecule(rng);
    const auto base = compute_descriptors(graph, specs);
    for (const auto& spec : specs) {
      const double v = base.values.at(spec.name);
      ASSERT_FALSE(std::isnan(v));
      if (spec.kind == DescriptorKind::integer) {
        EXPECT_EQ(v, std::floor(v)) << spec.name;
        EXPECT_GE(v, 0) << spec.name;
      }
    }
    EXPECT_GT(base.values.at("MolWt"), 0);
    EXPECT_GE(base.values.at("TPSA"), 0);
    EXPECT_GE(base.values.at("FractionCSP3"), 0);
    EXPECT_LE(base.values.at("FractionCSP3"), 1);
    for (int k = 0; k < 3; ++k) {
      const auto moved = compute_descriptors(chem::random_relabel(graph, rng), specs);
      EXPECT_EQ(moved.molecule, base.molecule);
      for (const auto& spec : specs) {
        EXPECT_NEAR(moved.values.at(spec.name), base.values.at(spec.name), 1e-9) << spec.name << " " << base.molecule;
      }
    }
  }
}

TEST(Properties, FragmentCountsMatchPatternLibrary) {
  Rng rng(5);
  std::vector<std::string> names;
  for (const auto& spec : descriptor_catalog()) {
    if (spec.name.starts_with("fr_")) names.push_back(spec.name);
  }
  const auto specs = descriptor_specs(names);
  const auto& library = pattern::PatternLibrary::builtin();
  for (int trial = 0; trial < 50; ++trial) {
    const auto graph = chem::random_molecule(rng);
    const auto values = compute_descriptors(graph, specs).values;
    const auto counts = pattern::count_fragments(graph, library);
    for (const auto& name : names) EXPECT_EQ(values.at(name), counts.at(name)) << name;
  }
}

}  // namespace
}  // namespace molforge::desc
