#include <gtest/gtest.h>

#include <set>

#include "molforge/chem/molgen.hpp"
#include "molforge/chem/smiles.hpp"
#include "molforge/fp/fingerprint.hpp"

namespace molforge::fp {
namespace {

using chem::parse_smiles;

TEST(AtomInvariant, SymmetryAndDistinctions) {
  const auto cc = parse_smiles("CC");
  EXPECT_EQ(atom_invariant(cc, 0), atom_invariant(cc, 1));
  const auto co = parse_smiles("CO");
  EXPECT_NE(atom_invariant(co, 0), atom_invariant(co, 1));
  EXPECT_NE(atom_invariant(parse_smiles("C"), 0), atom_invariant(parse_smiles("[CH3-]"), 0));
}

TEST(AtomInvariant, IgnoresChirality) {
  const auto a = parse_smiles("F[C@H](Cl)Br");
  const auto b = parse_smiles("F[C@@H](Cl)Br");
  EXPECT_EQ(atom_invariant(a, 1), atom_invariant(b, 1));
  EXPECT_EQ(morgan_fingerprint(a).set_bits, morgan_fingerprint(b).set_bits);
}

// Hand enumeration: methane has one radius-0 environment; every larger radius
// covers the same single atom and is suppressed.
TEST(Morgan, MethaneOneBit) {
  const auto envs = morgan_environments(parse_smiles("C"), 2);
  ASSERT_EQ(envs.size(), 1u);
  EXPECT_EQ(envs[0].radius, 0);
  EXPECT_EQ(morgan_fingerprint(parse_smiles("C")).set_bits.size(), 1u);
}

// Ethane: two radius-0 environments sharing one identifier, one radius-1
// environment covering both atoms (the second center is a duplicate set).
TEST(Morgan, EthaneTwoBits) {
  const auto envs = morgan_environments(parse_smiles("CC"), 2);
  ASSERT_EQ(envs.size(), 3u);
  EXPECT_EQ(envs[0].value, envs[1].value);
  EXPECT_EQ(envs[2].radius, 1);
  EXPECT_EQ(morgan_fingerprint(parse_smiles("CC")).set_bits.size(), 2u);
}

TEST(Morgan, SameGraphDifferentText) {
  EXPECT_EQ(morgan_fingerprint(parse_smiles("CCO")).set_bits, morgan_fingerprint(parse_smiles("OCC")).set_bits);
}

TEST(Morgan, SortedUniqueInRange) {
  const auto fp = morgan_fingerprint(parse_smiles("CC(=O)Oc1ccccc1C(=O)O"), 2, 64, true);
  EXPECT_TRUE(std::is_sorted(fp.set_bits.begin(), fp.set_bits.end()));
  EXPECT_EQ(std::set<int>(fp.set_bits.begin(), fp.set_bits.end()).size(), fp.set_bits.size());
  for (int b : fp.set_bits) {
    EXPECT_GE(b, 0);
    EXPECT_LT(b, 64);
    EXPECT_TRUE(fp.environment_log.count(b));
  }
}

TEST(Morgan, RadiusMonotone) {
  chem::MolGenConfig config;
  Rng rng(99);
  for (int i = 0; i < 100; ++i) {
    const auto g = chem::random_molecule(rng, config);
    for (int r = 0; r < 3; ++r) {
      const auto small = morgan_fingerprint(g, r).set_bits;
      const auto big = morgan_fingerprint(g, r + 1).set_bits;
      EXPECT_TRUE(std::includes(big.begin(), big.end(), small.begin(), small.end()));
    }
  }
}

TEST(Morgan, PopcountBound) {
  chem::MolGenConfig config;
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const auto g = chem::random_molecule(rng, config);
    const auto envs = morgan_environments(g, 2);
    const auto fp = morgan_fingerprint(g, 2);
    EXPECT_LE(fp.set_bits.size(), envs.size());
    EXPECT_LE(static_cast<int>(envs.size()), g.atom_count() * 3);
  }
}

TEST(Morgan, RelabelInvariance) {
  chem::MolGenConfig config;
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto g = chem::random_molecule(rng, config);
    const auto bits = morgan_fingerprint(g).set_bits;
    for (int k = 0; k < 5; ++k) ASSERT_EQ(morgan_fingerprint(chem::random_relabel(g, rng)).set_bits, bits);
  }
}

TEST(Morgan, RejectsBadArguments) {
  EXPECT_THROW(morgan_fingerprint(parse_smiles("C"), -1), ArgumentError);
  EXPECT_THROW(morgan_fingerprint(parse_smiles("C"), 2, 0), ArgumentError);
}

}  // namespace
}  // namespace molforge::fp
