#include <gtest/gtest.h>

#include <cmath>

#include "molforge/chem/smiles.hpp"
#include "molforge/common/error.hpp"
#include "molforge/desc/descriptors.hpp"
#include "molforge/ground/groundedness.hpp"

namespace molforge::ground {
namespace {

std::optional<double> value_of(const std::vector<Mention>& mentions, std::string_view feature) {
  for (const auto& mention : mentions) {
    if (mention.feature == feature) return mention.value;
  }
  ADD_FAILURE() << "feature " << feature << " missing from extractor output";
  return std::nullopt;
}

std::optional<double> extract(std::string_view text, std::string_view feature) {
  return value_of(extract_mentions("cot", "C", text, Lexicon::builtin()), feature);
}

TEST(GroundClassify, AllBinaryIsBoolean) {
  const std::vector<double> values{0, 1, 1, 0};
  const auto c = classify_feature("fr_amide", values);
  EXPECT_EQ(c.kind, FeatureKind::boolean);
  EXPECT_DOUBLE_EQ(c.boolean_fraction, 1.0);
}

TEST(GroundClassify, MixedIsNumerical) {
  const std::vector<double> values{0, 1, 2.4};
  const auto c = classify_feature("TPSA", values);
  EXPECT_EQ(c.kind, FeatureKind::numerical);
  EXPECT_NEAR(c.boolean_fraction, 2.0 / 3.0, 1e-15);
}

TEST(GroundClassify, NinetyPercentBoundaryIsInclusive) {
  std::vector<double> values{0, 1, 0, 1, 0, 1, 0, 1, 1, 3};
  auto c = classify_feature("f", values);
  EXPECT_EQ(c.kind, FeatureKind::boolean);
  EXPECT_DOUBLE_EQ(c.boolean_fraction, 0.9);
  values[0] = 2;  // 8 of 10
  EXPECT_EQ(classify_feature("f", values).kind, FeatureKind::numerical);
}

TEST(GroundClassify, ScalingCanFlipTheKind) {
  std::vector<double> values{0, 1, 1, 1, 0};
  EXPECT_EQ(classify_feature("f", values).kind, FeatureKind::boolean);
  for (auto& v : values) v *= 2;
  EXPECT_EQ(classify_feature("f", values).kind, FeatureKind::numerical);
}

TEST(GroundClassify, EmptyInputThrows) {
  EXPECT_THROW(classify_feature("f", std::vector<double>{}), ArgumentError);
}

TEST(GroundMidpoint, Examples) {
  EXPECT_DOUBLE_EQ(range_to_midpoint(300, 400), 350);
  EXPECT_DOUBLE_EQ(range_to_midpoint(5, 5), 5);
  EXPECT_NEAR(range_to_midpoint(-1.2, 0.4), -0.4, 1e-15);
  EXPECT_THROW(range_to_midpoint(2, 1), ArgumentError);
}

TEST(GroundExtract, ApproximateValueAndParenthesizedCount) {
  const std::string text =
      "The molecule is small and fairly polar (TPSA ~70). It carries many hydrogen-bond donors (4) and "
      "multiple acceptors, which raises the cost of desolvation.";
  const auto mentions = extract_mentions("c1", "CNCC(O)c1ccc(O)c(O)c1", text, Lexicon::builtin());
  EXPECT_EQ(value_of(mentions, "TPSA"), 70.0);
  EXPECT_EQ(value_of(mentions, "NumHDonors"), 4.0);
  EXPECT_EQ(value_of(mentions, "NumHAcceptors"), std::nullopt);
  EXPECT_EQ(value_of(mentions, "MolWt"), std::nullopt);
  EXPECT_EQ(mentions.size(), Lexicon::builtin().entries().size());
  for (const auto& m : mentions) {
    EXPECT_EQ(m.cot_id, "c1");
    EXPECT_EQ(m.provenance, Provenance::builtin);
  }
}

TEST(GroundExtract, TildeSpellings) {
  EXPECT_EQ(extract("TPSA \xE2\x88\xBC" "70", "TPSA"), 70.0);  // U+223C
  EXPECT_EQ(extract("TPSA \\(\\sim\\)70", "TPSA"), 70.0);       // LaTeX source
  EXPECT_EQ(extract("TPSA of about 70.5.", "TPSA"), 70.5);
}

TEST(GroundExtract, RangesMapToMidpoints) {
  EXPECT_EQ(extract("logP between 1 and 3", "MolLogP"), 2.0);
  EXPECT_EQ(extract("molecular weight 300-400 Da", "MolWt"), 350.0);
  EXPECT_EQ(extract("molecular weight 300\xE2\x80\x93" "400 Da", "MolWt"), 350.0);
  EXPECT_EQ(extract("a logP of 1 to 2", "MolLogP"), 1.5);
}

TEST(GroundExtract, NegativeNumbersAndCounts) {
  EXPECT_EQ(extract("logP near -1.2, so it is hydrophilic", "MolLogP"), -1.2);
  EXPECT_EQ(extract("It has two aromatic rings.", "NumAromaticRings"), 2.0);
  EXPECT_EQ(extract("It has 3 rotatable bonds.", "NumRotatableBonds"), 3.0);
  EXPECT_EQ(extract("It has two aromatic rings.", "RingCount"), std::nullopt);
}

TEST(GroundExtract, ExplicitAbsenceOnlyGivesZero) {
  EXPECT_EQ(extract("No hydrogen bond donors are present.", "NumHDonors"), 0.0);
  EXPECT_EQ(extract("Hydrogen bond donors: none.", "NumHDonors"), 0.0);
  EXPECT_EQ(extract("Polar groups dominate the surface.", "NumHDonors"), std::nullopt);
}

TEST(GroundExtract, BooleanPresenceAndAbsence) {
  EXPECT_EQ(extract("The core is a lactam ring.", "fr_lactam"), 1.0);
  EXPECT_EQ(extract("There is no lactam here.", "fr_lactam"), 0.0);
  EXPECT_EQ(extract("A furan is absent.", "fr_furan"), 0.0);
  EXPECT_EQ(extract("The secondary amine is protonated.", "fr_NH1"), 1.0);
}

TEST(GroundExtract, WordBoundariesHold) {
  EXPECT_EQ(extract("Nitrogen atoms are common.", "fr_nitro"), std::nullopt);
  EXPECT_EQ(extract("A sulfonamide group.", "fr_amide"), std::nullopt);
  EXPECT_EQ(extract("A sulfonamide group.", "fr_sulfonamd"), 1.0);
  EXPECT_EQ(extract("Whether it crosses is unclear.", "fr_ether"), std::nullopt);
}

TEST(GroundExtract, FirstValueWinsAndOutputIsDeterministic) {
  const std::string text = "TPSA is 40. Later the TPSA is quoted as 90.";
  EXPECT_EQ(extract(text, "TPSA"), 40.0);
  const auto a = extract_mentions("x", "C", text, Lexicon::builtin());
  const auto b = extract_mentions("x", "C", text, Lexicon::builtin());
  EXPECT_EQ(a, b);
}

TEST(GroundLexicon, ParsesAndRestricts) {
  const auto lexicon = Lexicon::parse("# comment\nTPSA\tnumerical\ttpsa|polar surface area\nfr_furan\tboolean\tfuran\n");
  ASSERT_EQ(lexicon.entries().size(), 2u);
  EXPECT_TRUE(lexicon.find("fr_furan")->boolean);
  const std::vector<std::string> keep{"TPSA"};
  EXPECT_EQ(lexicon.restricted(keep).entries().size(), 1u);
  const std::vector<std::string> unknown{"nope"};
  EXPECT_THROW(lexicon.restricted(unknown), ArgumentError);
  EXPECT_THROW(Lexicon::parse("TPSA\tsometimes\ttpsa\n"), DataError);
  EXPECT_THROW(Lexicon::parse("TPSA\tnumerical\n"), DataError);
  for (const auto& entry : Lexicon::builtin().entries()) EXPECT_FALSE(entry.synonyms.empty());
}

TEST(GroundLexicon, BuiltinFeaturesAreCataloguedDescriptors) {
  for (const auto& entry : Lexicon::builtin().entries()) {
    EXPECT_NO_THROW(desc::descriptor_spec(entry.feature)) << entry.feature;
  }
}

class GroundAudit : public ::testing::Test {
 protected:
  const std::vector<std::string> smiles{"CCO",     "c1ccccc1O", "CC(=O)O",  "NCCN",   "OCC(O)CO",
                                        "CC(N)=O", "c1ccncc1",  "OC(=O)CN", "CCCCCC", "CS(=O)(=O)N"};
  const std::vector<std::string> features{"TPSA", "MolWt", "fr_benzene", "NumAtomStereoCenters"};
  std::map<std::string, std::map<std::string, double>> truth = compute_ground_truth(smiles, features);

  double truth_of(const std::string& s, const std::string& f) { return truth.at(chem::canonical_smiles(s)).at(f); }
};

TEST_F(GroundAudit, PerfectMentionsScorePerfectly) {
  std::vector<Mention> mentions;
  for (std::size_t i = 0; i < smiles.size(); ++i) {
    const auto id = "cot" + std::to_string(i);
    mentions.push_back({id, smiles[i], "TPSA", truth_of(smiles[i], "TPSA"), Provenance::external});
    mentions.push_back({id, smiles[i], "MolWt", truth_of(smiles[i], "MolWt"), Provenance::external});
    mentions.push_back({id, smiles[i], "fr_benzene", truth_of(smiles[i], "fr_benzene") > 0 ? 1.0 : 0.0,
                        Provenance::external});
  }
  const auto report = audit(mentions, features, truth, 10);
  ASSERT_EQ(report.features.size(), 4u);
  for (const auto* name : {"TPSA", "MolWt"}) {
    const auto& row = *std::find_if(report.features.begin(), report.features.end(),
                                    [&](const FeatureReport& r) { return r.feature == name; });
    EXPECT_EQ(row.kind, FeatureKind::numerical);
    EXPECT_EQ(row.n, 10);
    EXPECT_DOUBLE_EQ(row.occurrence, 1.0);
    ASSERT_TRUE(row.spearman.has_value());
    EXPECT_NEAR(*row.spearman, 1.0, 1e-12);
    EXPECT_EQ(row.mae, 0.0);
  }
  const auto& benzene = report.features[2];
  EXPECT_EQ(benzene.kind, FeatureKind::boolean);
  EXPECT_EQ(benzene.precision, 1.0);
  EXPECT_EQ(benzene.recall, 1.0);
  const auto& stereo = report.features[3];
  EXPECT_EQ(stereo.occurrence, 0.0);
  EXPECT_TRUE(stereo.suppressed);
  EXPECT_FALSE(stereo.kind.has_value());
  EXPECT_FALSE(stereo.spearman || stereo.mae || stereo.precision || stereo.recall);
}

TEST_F(GroundAudit, PresencePrecisionAtSmallN) {
  // Four presence claims, three molecules truly carry a benzene ring.
  std::vector<Mention> mentions{{"a", "c1ccccc1O", "fr_benzene", 1.0}, {"b", "c1ccccc1", "fr_benzene", 1.0},
                                {"c", "Cc1ccccc1", "fr_benzene", 1.0}, {"d", "CCO", "fr_benzene", 1.0}};
  std::vector<std::string> more = smiles;
  more.insert(more.end(), {"c1ccccc1", "Cc1ccccc1"});
  const std::vector<std::string> target{"fr_benzene"};
  const auto report = audit(mentions, target, compute_ground_truth(more, target), 20);
  const auto& row = report.features[0];
  EXPECT_EQ(row.n, 4);
  EXPECT_FALSE(row.suppressed);
  EXPECT_DOUBLE_EQ(*row.precision, 0.75);
  EXPECT_DOUBLE_EQ(*row.recall, 1.0);
  EXPECT_DOUBLE_EQ(row.occurrence, 0.2);
}

TEST_F(GroundAudit, FewerThanThreeIsSuppressed) {
  std::vector<Mention> mentions{{"a", "CCO", "TPSA", 20.0}, {"b", "NCCN", "TPSA", 52.0}, {"b", "NCCN", "MolWt", std::nullopt}};
  const auto report = audit(mentions, features, truth, 5);
  EXPECT_EQ(report.features[0].n, 2);
  EXPECT_TRUE(report.features[0].suppressed);
  EXPECT_FALSE(report.features[0].spearman || report.features[0].mae);
  EXPECT_DOUBLE_EQ(report.features[0].occurrence, 0.4);
  EXPECT_EQ(report.features[1].n, 0);
}

TEST_F(GroundAudit, RepeatedMentionKeepsFirstNonNull) {
  std::vector<Mention> mentions{{"a", "CCO", "TPSA", std::nullopt}, {"a", "CCO", "TPSA", 1.0},
                                {"a", "CCO", "TPSA", 99.0}};
  const auto report = audit(mentions, features, truth, 1);
  EXPECT_EQ(report.features[0].n, 1);
  EXPECT_DOUBLE_EQ(report.features[0].occurrence, 1.0);
}

TEST_F(GroundAudit, ErrorsOnMissingTruthAndShortCount) {
  std::vector<Mention> unknown{{"a", "CCCCCCCCCC", "TPSA", 1.0}};
  EXPECT_THROW(audit(unknown, features, truth, 1), DataError);
  std::vector<Mention> two{{"a", "CCO", "TPSA", 1.0}, {"b", "CCO", "TPSA", 1.0}};
  EXPECT_THROW(audit(two, features, truth, 1), ArgumentError);
}

// The fragment pattern is the narrow four-membered ring, so a rationale that
// calls any cyclic amide a lactam produces false positives.
TEST(GroundLactam, BroadUsageIsScoredAgainstTheNarrowPattern) {
  const std::vector<std::string> molecules{"O=C1CCN1", "O=C1CCCN1", "O=C1CCCCN1"};
  const std::vector<std::string> target{"fr_lactam"};
  const auto truth = compute_ground_truth(molecules, target);
  std::vector<Mention> mentions;
  for (std::size_t i = 0; i < molecules.size(); ++i) {
    for (auto m : extract_mentions("cot" + std::to_string(i), molecules[i], "The ring is a lactam.",
                                   Lexicon::builtin().restricted(target))) {
      mentions.push_back(m);
    }
  }
  const auto report = audit(mentions, target, truth, 3);
  EXPECT_NEAR(*report.features[0].precision, 1.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(*report.features[0].recall, 1.0);
}

TEST_F(GroundAudit, CsvAndHeatmap) {
  std::vector<Mention> mentions;
  for (std::size_t i = 0; i < 5; ++i) {
    mentions.push_back({"c" + std::to_string(i), smiles[i], "TPSA", truth_of(smiles[i], "TPSA") + 1.0});
  }
  const auto report = audit(mentions, features, truth, 50);
  const auto csv = report_csv(report);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + static_cast<long>(features.size()));
  EXPECT_EQ(csv, report_csv(report));
  EXPECT_EQ(report_csv(parse_report_csv(csv)), csv);
  EXPECT_THROW(parse_report_csv("feature,kind\n"), DataError);
  EXPECT_THROW(parse_report_csv(csv + "TPSA,numerical,x,1,,,,,false\n"), DataError);
  EXPECT_NE(csv.find("TPSA,numerical,0.1,5,1,1,,,false"), std::string::npos);
  EXPECT_NE(csv.find("MolWt,,0,0,,,,,true"), std::string::npos);

  const std::vector<std::pair<std::string, GroundednessReport>> rows{{"model A", report}};
  HeatmapOptions correctness;
  correctness.metric = HeatmapMetric::correctness;
  const auto svg = render_heatmap_svg(rows, correctness);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  // Three of the four features are suppressed; they share the neutral fill.
  std::size_t neutral = 0;
  for (auto pos = svg.find("fill=\"#c8c8c8\""); pos != std::string::npos; pos = svg.find("fill=\"#c8c8c8\"", pos + 1)) {
    ++neutral;
  }
  EXPECT_EQ(neutral, 3u + 1u);  // plus the legend swatch
  HeatmapOptions occurrence;
  occurrence.log_scale = true;
  const auto log_svg = render_heatmap_svg(rows, occurrence);
  EXPECT_NE(log_svg.find("log color scale"), std::string::npos);
  EXPECT_EQ(log_svg, render_heatmap_svg(rows, occurrence));
}

TEST(GroundJsonl, RoundTrips) {
  std::vector<Mention> mentions{{"a", "CCO", "TPSA", 20.23, Provenance::external},
                                {"b", "C", "MolWt", std::nullopt, Provenance::external}};
  EXPECT_EQ(parse_mentions_jsonl(mentions_to_jsonl(mentions)), mentions);
  EXPECT_THROW(parse_mentions_jsonl("{\"cot_id\": \"a\"}\n"), DataError);
}

}  // namespace
}  // namespace molforge::ground
