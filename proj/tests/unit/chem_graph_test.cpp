#include <gtest/gtest.h>

#include <set>

#include "isomorphism.hpp"
#include "molforge/chem/molgen.hpp"
#include "molforge/chem/smiles.hpp"

namespace molforge::chem {
namespace {

TEST(ParseSmiles, SingleCarbon) {
  const auto g = parse_smiles("C");
  EXPECT_EQ(g.atom_count(), 1);
  EXPECT_EQ(g.bond_count(), 0);
  EXPECT_EQ(g.atom(0).element, 6);
}

TEST(ParseSmiles, Cyclopropane) {
  const auto g = parse_smiles("C1CC1");
  EXPECT_EQ(g.atom_count(), 3);
  EXPECT_EQ(g.bond_count(), 3);
  ASSERT_EQ(g.rings().size(), 1u);
  EXPECT_EQ(g.rings()[0], (std::vector<int>{0, 1, 2}));
}

TEST(ParseSmiles, Benzene) {
  const auto g = parse_smiles("c1ccccc1");
  EXPECT_EQ(g.atom_count(), 6);
  EXPECT_EQ(g.bond_count(), 6);
  for (const auto& a : g.atoms()) EXPECT_TRUE(a.aromatic);
  for (const auto& b : g.bonds()) EXPECT_EQ(b.order, BondOrder::aromatic);
  EXPECT_EQ(g.rings().size(), 1u);
  for (int i = 0; i < 6; ++i) EXPECT_EQ(g.implicit_h(i), 1);
}

TEST(ParseSmiles, UnclosedRingReportsOffset) {
  const auto result = try_parse_smiles("C1CC");
  ASSERT_FALSE(result.ok());
  ASSERT_FALSE(result.diagnostics.empty());
  EXPECT_EQ(result.diagnostics[0].severity, Severity::error);
  EXPECT_EQ(result.diagnostics[0].position, 1u);
  EXPECT_NE(result.diagnostics[0].message.find("unclosed ring"), std::string::npos);
  EXPECT_THROW(parse_smiles("C1CC"), SmilesError);
}

struct BadInput {
  const char* text;
  const char* fragment;
};

class ParseErrors : public ::testing::TestWithParam<BadInput> {};

TEST_P(ParseErrors, ReportsProblemWithinText) {
  const auto& p = GetParam();
  const auto result = try_parse_smiles(p.text);
  ASSERT_FALSE(result.ok()) << p.text;
  EXPECT_NE(result.diagnostics[0].message.find(p.fragment), std::string::npos) << result.diagnostics[0].message;
  EXPECT_LT(result.diagnostics[0].position, std::max<std::size_t>(1, std::string_view(p.text).size()));
}

INSTANTIATE_TEST_SUITE_P(Smiles, ParseErrors,
                         ::testing::Values(BadInput{"CC(C", "unbalanced parenthesis"}, BadInput{"CC)C", "unbalanced"},
                                           BadInput{"CXC", "unknown element"}, BadInput{"C[Xx]", "unknown element"},
                                           BadInput{"C=1CC-1", "conflicting bond orders"},
                                           BadInput{"[CH4+", "unterminated"}, BadInput{"[C+H]", "hydrogen count"},
                                           BadInput{"C*C", "wildcard"}, BadInput{"C==C", "two bond symbols"},
                                           BadInput{"[C@TH1](F)(Cl)Br", "extended stereo"}, BadInput{"", "empty"}));

TEST(ParseSmiles, PercentRingClosure) {
  const auto g = parse_smiles("C%12CCC%12");
  EXPECT_EQ(g.bond_count(), 4);
  EXPECT_EQ(g.rings().size(), 1u);
}

TEST(ParseSmiles, BracketAtomFields) {
  const auto g = parse_smiles("[13CH3:4][NH3+].[O-2]");
  EXPECT_EQ(g.atom(0).isotope, 13);
  EXPECT_EQ(g.implicit_h(0), 3);
  EXPECT_EQ(g.atom(1).formal_charge, 1);
  EXPECT_EQ(g.atom(2).formal_charge, -2);
  EXPECT_EQ(g.component_count(), 2);
}

TEST(ParseSmiles, DirectionalBondsWarn) {
  const auto result = try_parse_smiles("F/C=C/F");
  ASSERT_TRUE(result.ok());
  ASSERT_EQ(result.diagnostics.size(), 1u);
  EXPECT_EQ(result.diagnostics[0].severity, Severity::warning);
}

TEST(ParseSmiles, ValenceOverflowWarns) {
  const auto result = try_parse_smiles("CC(C)(C)(C)C");
  ASSERT_TRUE(result.ok());
  EXPECT_EQ(result.graph->implicit_h(1), 0);
  ASSERT_FALSE(result.diagnostics.empty());
  EXPECT_EQ(result.diagnostics[0].severity, Severity::warning);
}

TEST(ImplicitHydrogens, ValenceModel) {
  EXPECT_EQ(implicit_hydrogens(parse_smiles("C"), 0), 4);
  EXPECT_EQ(implicit_hydrogens(parse_smiles("CCO"), 2), 1);
  EXPECT_EQ(implicit_hydrogens(parse_smiles("[NH4+]"), 0), 4);
  EXPECT_EQ(implicit_hydrogens(parse_smiles("CS(=O)(=O)C"), 1), 0);
  EXPECT_EQ(implicit_hydrogens(parse_smiles("CN(=O)=O"), 1), 0);
  EXPECT_EQ(implicit_hydrogens(parse_smiles("c1ccncc1"), 3), 0);
  EXPECT_EQ(implicit_hydrogens(parse_smiles("c1ccsc1"), 3), 0);
  EXPECT_EQ(implicit_hydrogens(parse_smiles("c1cc[nH]c1"), 3), 1);
  EXPECT_EQ(implicit_hydrogens(parse_smiles("[Na+]"), 0), 0);
}

TEST(Rings, Acyclic) { EXPECT_TRUE(parse_smiles("CCO").rings().empty()); }

TEST(Rings, Naphthalene) {
  const auto g = parse_smiles("c1ccc2ccccc2c1");
  ASSERT_EQ(g.rings().size(), 2u);
  for (const auto& r : g.rings()) EXPECT_EQ(r.size(), 6u);
}

TEST(Rings, CubaneBasisSize) {
  const auto g = parse_smiles("C12C3C4C1C5C2C3C45");
  EXPECT_EQ(g.rings().size(), 5u);
  for (const auto& r : g.rings()) EXPECT_EQ(r.size(), 4u);
}

TEST(Rings, SpiroAndBridged) {
  EXPECT_EQ(parse_smiles("C1CCC11CCCC1").rings().size(), 2u);
  const auto norbornane = parse_smiles("C1CC2CCC1C2");
  ASSERT_EQ(norbornane.rings().size(), 2u);
  for (const auto& r : norbornane.rings()) EXPECT_EQ(r.size(), 5u);
}

TEST(Rings, InRingFlagsMatchRings) {
  const auto g = parse_smiles("c1ccccc1CC1CC1");
  for (const auto& b : g.bonds()) {
    bool listed = false;
    for (const auto& r : g.rings()) {
      for (std::size_t k = 0; k < r.size(); ++k) {
        const int x = r[k];
        const int y = r[(k + 1) % r.size()];
        if ((b.begin == x && b.end == y) || (b.begin == y && b.end == x)) listed = true;
      }
    }
    EXPECT_EQ(b.in_ring, listed) << b.index;
  }
}

TEST(CanonicalRanks, Ethanol) {
  const auto g = parse_smiles("CCO");
  const auto r = canonical_ranks(g);
  EXPECT_NE(r[0], r[1]);
  EXPECT_NE(r[2], r[0]);
  EXPECT_NE(r[2], r[1]);
}

TEST(CanonicalRanks, EthaneTiesBeforeBreak) {
  const auto g = parse_smiles("CC");
  const auto classes = refined_invariant_classes(g);
  EXPECT_EQ(classes[0], classes[1]);
  const auto r = canonical_ranks(g);
  EXPECT_EQ(std::set<int>(r.begin(), r.end()).size(), 2u);
}

TEST(WriteSmiles, SameMoleculeSameString) {
  EXPECT_EQ(canonical_smiles("OCC"), canonical_smiles("CCO"));
  EXPECT_EQ(canonical_smiles("CCO"), "CCO");
  EXPECT_EQ(canonical_smiles("C1=CC=CC=C1"), canonical_smiles("C=1C=CC=CC=1"));
}

TEST(WriteSmiles, Idempotent) {
  for (const char* s : {"CC(=O)Oc1ccccc1C(=O)O", "C[C@H](N)C(=O)O", "[13CH3][NH3+].[Cl-]", "c1ccc2ccccc2c1",
                        "C12C3C4C1C5C2C3C45", "N#CC1=CC=CS1", "c1cc[nH]c1", "F[C@@](Cl)(Br)I"}) {
    const auto once = canonical_smiles(s);
    EXPECT_EQ(canonical_smiles(once), once) << s;
    EXPECT_TRUE(testing::isomorphic(parse_smiles(s), parse_smiles(once))) << s << " -> " << once;
  }
}

TEST(WriteSmiles, ChiralityHandednessSurvivesRewriting) {
  const auto l_ala = canonical_smiles("C[C@@H](C(=O)O)N");
  const auto also_l = canonical_smiles("N[C@@H](C)C(=O)O");
  const auto d_ala = canonical_smiles("N[C@H](C)C(=O)O");
  EXPECT_EQ(l_ala, also_l);
  EXPECT_NE(l_ala, d_ala);
}

TEST(WriteSmiles, RingBondSymbolAndPercent) {
  // 11 fused ring closures force two-digit labels.
  const std::string s = "C12C3C4C5C6C7C8C9C%10C%11C%12C1C2C3C4C5C6C7C8C9C%10C%11%12";
  const auto g = parse_smiles(s);
  const auto out = write_smiles(g);
  EXPECT_TRUE(testing::isomorphic(g, parse_smiles(out))) << out;
}

TEST(Properties, RoundTripAndRelabelInvariance) {
  Rng rng(20240611);
  MolGenConfig config;
  config.second_fragment_prob = 0.1;
  for (int i = 0; i < 300; ++i) {
    const auto g = random_molecule(rng, config);
    EXPECT_TRUE(g.warnings().empty());
    const auto text = write_smiles(g);
    const auto reparsed = parse_smiles(text);
    ASSERT_TRUE(testing::isomorphic(g, reparsed)) << text;
    EXPECT_EQ(write_smiles(reparsed), text);
    EXPECT_EQ(static_cast<int>(g.rings().size()), g.bond_count() - g.atom_count() + g.component_count());
    int total_h = 0;
    for (int a = 0; a < g.atom_count(); ++a) total_h += g.total_h(a);
    for (int k = 0; k < 3; ++k) {
      const auto shuffled = random_relabel(g, rng);
      ASSERT_EQ(write_smiles(shuffled), text);
      int shuffled_h = 0;
      for (int a = 0; a < shuffled.atom_count(); ++a) shuffled_h += shuffled.total_h(a);
      EXPECT_EQ(shuffled_h, total_h);
    }
  }
}

TEST(Properties, BenzenePermutations) {
  const auto g = parse_smiles("c1ccccc1");
  Rng rng(7);
  for (int k = 0; k < 20; ++k) EXPECT_EQ(write_smiles(random_relabel(g, rng)), "c1ccccc1");
}

}  // namespace
}  // namespace molforge::chem
