#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "molforge/chem/molgen.hpp"
#include "molforge/chem/smiles.hpp"
#include "molforge/common/error.hpp"
#include "molforge/common/io.hpp"
#include "molforge/common/rng.hpp"
#include "molforge/desc/descriptors.hpp"
#include "molforge/forge/builders.hpp"
#include "molforge/forge/cot.hpp"
#include "molforge/forge/mixture.hpp"
#include "molforge/forge/records.hpp"
#include "molforge/forge/templates.hpp"
#include "molforge/pattern/pattern.hpp"

namespace molforge::forge {
namespace {

std::size_t count_markers(const std::string& text) {
  std::size_t count = 0;
  for (auto pos = text.find(kMoleculeMarker); pos != std::string::npos; pos = text.find(kMoleculeMarker, pos + 1)) {
    ++count;
  }
  return count;
}

const Corpus& random_corpus() {
  static const Corpus corpus = [] {
    Rng rng(2024);
    std::vector<std::string> smiles;
    for (int i = 0; i < 300; ++i) smiles.push_back(chem::write_smiles(chem::random_molecule(rng)));
    return prepare_corpus(smiles);
  }();
  return corpus;
}

TEST(Templates, RenderReplacesSlotsAndKeepsMoleculeMarker) {
  EXPECT_EQ(render_template("Does molecule <molecule> contain {sub}?", {{"sub", "furan"}}),
            "Does molecule <molecule> contain furan?");
  EXPECT_THROW(render_template("Does molecule <molecule> contain {sub}?", {}), ArgumentError);
  EXPECT_THROW(render_template("broken {sub", {{"sub", "x"}}), ArgumentError);
  for (const auto& [task, set] : TemplateLibrary::builtin().sets()) {
    for (const auto& templ : set.templates) {
      std::map<std::string, std::string> slots;
      for (const auto& slot : template_slots(templ)) slots[slot] = "value";
      const auto rendered = render_template(templ, slots);
      EXPECT_EQ(rendered.find('{'), std::string::npos) << rendered;
      EXPECT_EQ(count_markers(rendered), 1u) << rendered;
    }
  }
}

TEST(Templates, BuiltinSetsAreWellFormed) {
  const auto& library = TemplateLibrary::builtin();
  for (const auto& [task, set] : library.sets()) {
    EXPECT_GE(set.templates.size(), 5u) << task;
    EXPECT_LE(set.templates.size(), 20u) << task;
  }
  for (const auto& templ : library.get("substructure").templates) {
    const auto slots = template_slots(templ);
    EXPECT_EQ(slots, std::vector<std::string>{"sub"}) << templ;
  }
  const auto& tasks = TaskTable::builtin().tasks();
  EXPECT_EQ(tasks.size(), 15u);
  for (const auto& task : tasks) EXPECT_TRUE(library.contains(task.task_id)) << task.task_id;
  EXPECT_EQ(TaskTable::builtin().get("bbb_martins").positive_label, "pass");
  EXPECT_EQ(TaskTable::builtin().get("cyp1a2_veith").metric, metrics::Metric::pr_auc);
  EXPECT_THROW(TaskTable::builtin().get("nope"), ArgumentError);
}

TEST(Templates, ParserRejectsBadSets) {
  EXPECT_THROW(TemplateLibrary::parse("t\tno marker here\n"), DataError);
  std::string four;
  for (int i = 0; i < 4; ++i) four += "t\tQ" + std::to_string(i) + " <molecule>?\n";
  EXPECT_THROW(TemplateLibrary::parse(four), DataError);
  EXPECT_NO_THROW(TemplateLibrary::parse(four + "t\tQ4 <molecule>?\n"));
  EXPECT_THROW(TaskTable::parse("a\tA\tf1\tyes\tno\n"), DataError);
  EXPECT_THROW(TaskTable::parse("a\tA\troc_auc\tyes\tyes\n"), DataError);
}

TEST(Corpus, CanonicalizesAndRejects) {
  const std::vector<std::string> input{"OCC", "C1CC", "c1ccccc1"};
  const auto corpus = prepare_corpus(input);
  ASSERT_EQ(corpus.molecules.size(), 2u);
  EXPECT_EQ(corpus.molecules[0].smiles, chem::canonical_smiles("CCO"));
  EXPECT_EQ(corpus.rejected.size(), 1u);
  EXPECT_FALSE(corpus.molecules[1].fp_bits.empty());
}

TEST(Substructure, BalancedAndRecheckedAgainstMatcher) {
  const auto& corpus = random_corpus();
  const auto& library = pattern::PatternLibrary::builtin();
  SubstructureOptions options;
  options.quota = 20;
  options.seed = 5;
  const auto records = build_substructure_examples(corpus, library, TemplateLibrary::builtin(), options);
  ASSERT_FALSE(records.empty());
  std::map<std::string, std::pair<int, int>> counts;
  for (const auto& record : records) {
    const auto& name = record.meta.at("pattern");
    ASSERT_TRUE(record.label.has_value());
    auto& [pos, neg] = counts[name];
    (*record.label == Label::positive ? pos : neg) += 1;
    EXPECT_TRUE(record.answer == "Yes." || record.answer == "No.");
    EXPECT_EQ(record.answer == "Yes.", *record.label == Label::positive);
    EXPECT_EQ(count_markers(record.prompt), 1u);
    const auto* entry = library.find(name);
    ASSERT_NE(entry, nullptr);
    const bool truth = pattern::has_substructure(chem::parse_smiles(record.smiles), entry->pattern);
    EXPECT_EQ(truth, *record.label == Label::positive) << name << " " << record.smiles;
    EXPECT_EQ(record.split == Split::test, !entry->seen);
  }
  for (const auto& [name, pair] : counts) {
    EXPECT_EQ(pair.first, pair.second) << name;
    EXPECT_LE(pair.first, 20);
  }
  // Determinism.
  EXPECT_EQ(records, build_substructure_examples(corpus, library, TemplateLibrary::builtin(), options, 1));
}

TEST(Recheck, CleanCorpusPassesAndTamperingIsCaught) {
  const auto& corpus = random_corpus();
  const auto& library = pattern::PatternLibrary::builtin();
  SubstructureOptions options;
  options.quota = 10;
  auto records = build_substructure_examples(corpus, library, TemplateLibrary::builtin(), options);
  const std::vector<std::string> names{"TPSA", "HeavyAtomCount", "fr_amide"};
  const auto property = build_property_examples(corpus, desc::descriptor_specs(names), TemplateLibrary::builtin(), 1);
  records.insert(records.end(), property.begin(), property.begin() + 60);
  const auto recovery = build_smiles_recovery_examples(corpus, TemplateLibrary::builtin(), 1);
  records.insert(records.end(), recovery.begin(), recovery.begin() + 20);
  EXPECT_TRUE(recheck_records(records, library).empty());

  auto flipped = records;
  flipped.front().answer = flipped.front().answer == "Yes." ? "No." : "Yes.";
  const auto p = std::find_if(flipped.begin(), flipped.end(), [](const auto& r) { return r.family == Family::property; });
  p->answer = "9999.";
  flipped.back().fp_bits.push_back(2047);
  const auto problems = recheck_records(flipped, library, 3);
  ASSERT_EQ(problems.size(), 3u);
  EXPECT_EQ(problems.front().rfind("line 1: substructure", 0), 0u) << problems.front();
}

TEST(Substructure, AbsentPatternDroppedAndEmptyCorpusRejected) {
  const auto library = pattern::PatternLibrary::parse("gold\t[Au]\tsimple\tseen\ncarbon\t[#6]\tsimple\tseen\n");
  const std::vector<std::string> smiles{"CCO", "O", "CC", "CCC", "N"};
  const auto corpus = prepare_corpus(smiles);
  const auto records = build_substructure_examples(corpus, library, TemplateLibrary::builtin(), {});
  for (const auto& record : records) EXPECT_EQ(record.meta.at("pattern"), "carbon");
  EXPECT_EQ(records.size(), 4u);  // 3 carbon-bearing vs 2 without: 2 + 2
  EXPECT_THROW(build_substructure_examples(Corpus{}, library, TemplateLibrary::builtin(), {}), ArgumentError);
}

TEST(Property, AnswerFormatting) {
  using desc::DescriptorKind;
  EXPECT_EQ(format_property_answer(3, DescriptorKind::integer), "3.");
  EXPECT_EQ(format_property_answer(0.61, DescriptorKind::real), "0.6");
  EXPECT_EQ(format_property_answer(-2.44, DescriptorKind::real), "-2.4");
  EXPECT_EQ(format_property_answer(0.25, DescriptorKind::real), "0.3");
  EXPECT_EQ(format_property_answer(-0.25, DescriptorKind::real), "-0.3");
  EXPECT_EQ(format_property_answer(-0.04, DescriptorKind::real), "0.0");
  EXPECT_EQ(parse_property_answer("3."), 3.0);
  EXPECT_EQ(parse_property_answer("-2.4"), -2.4);
  EXPECT_FALSE(parse_property_answer("three").has_value());
}

TEST(Property, HeavyAtomCountOfEthanol) {
  const std::vector<std::string> smiles{"CCO"};
  const auto corpus = prepare_corpus(smiles);
  const std::vector<desc::DescriptorSpec> specs{desc::descriptor_spec("HeavyAtomCount")};
  const auto records = build_property_examples(corpus, specs, TemplateLibrary::builtin(), 1);
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].answer, "3.");
  EXPECT_NE(records[0].prompt.find("heavy atoms"), std::string::npos);
  const std::vector<desc::DescriptorSpec> unknown{{"NotADescriptor", desc::DescriptorKind::real, ""}};
  EXPECT_THROW(build_property_examples(corpus, unknown, TemplateLibrary::builtin(), 1), ArgumentError);
}

TEST(Property, AnswersRoundTripAgainstDescriptorEngine) {
  const auto& corpus = random_corpus();
  std::vector<desc::DescriptorSpec> specs(desc::descriptor_catalog().begin(), desc::descriptor_catalog().begin() + 12);
  const auto records = build_property_examples(corpus, specs, TemplateLibrary::builtin(), 3);
  ASSERT_EQ(records.size(), corpus.molecules.size() * specs.size());
  for (const auto& record : records) {
    const auto& spec = desc::descriptor_spec(record.meta.at("descriptor"));
    const std::vector<desc::DescriptorSpec> one{spec};
    const double truth = desc::compute_descriptors(chem::parse_smiles(record.smiles), one).values.at(spec.name);
    const auto parsed = parse_property_answer(record.answer);
    ASSERT_TRUE(parsed.has_value()) << record.answer;
    if (spec.kind == desc::DescriptorKind::integer) {
      EXPECT_EQ(*parsed, truth);
      EXPECT_EQ(record.answer.back(), '.');
    } else {
      EXPECT_LE(std::abs(*parsed - truth), 0.05 + 1e-9) << spec.name << " " << record.smiles;
    }
  }
}

std::vector<DownstreamInput> downstream_inputs(int train_pos, int train_neg, int test_pos, int test_neg) {
  Rng rng(77);
  std::vector<DownstreamInput> inputs;
  const auto add = [&](int n, Label label, Split split) {
    for (int i = 0; i < n; ++i) inputs.push_back({chem::write_smiles(chem::random_molecule(rng)), label, split});
  };
  add(train_pos, Label::positive, Split::train);
  add(train_neg, Label::negative, Split::train);
  add(test_pos, Label::positive, Split::test);
  add(test_neg, Label::negative, Split::test);
  return inputs;
}

TEST(Downstream, TrainUpsampledTestUntouched) {
  const auto inputs = downstream_inputs(30, 10, 30, 10);
  const auto& task = TaskTable::builtin().get("bbb_martins");
  const auto records = build_downstream_yn(inputs, task, TemplateLibrary::builtin(), 9);
  std::map<std::pair<Split, Label>, int> counts;
  for (const auto& record : records) counts[{record.split, *record.label}]++;
  EXPECT_EQ((counts[{Split::train, Label::positive}]), 30);
  EXPECT_EQ((counts[{Split::train, Label::negative}]), 30);
  EXPECT_EQ((counts[{Split::test, Label::positive}]), 30);
  EXPECT_EQ((counts[{Split::test, Label::negative}]), 10);
  // Duplicates are exact copies of the originals.
  const std::vector<ExampleRecord> originals(records.begin(), records.begin() + 80);
  for (std::size_t i = 80; i < records.size(); ++i) {
    EXPECT_NE(std::find(originals.begin(), originals.end(), records[i]), originals.end());
    EXPECT_EQ(*records[i].label, Label::negative);
  }
  for (const auto& record : records) {
    EXPECT_NE(record.prompt.find("Answer with yes or no."), std::string::npos);
    EXPECT_EQ(record.answer, *record.label == Label::positive ? "Yes." : "No.");
  }
  EXPECT_THROW(build_downstream_yn(downstream_inputs(5, 0, 3, 3), task, TemplateLibrary::builtin(), 9),
               ArgumentError);
}

forest::ImportanceReport catalog_report(std::size_t count) {
  forest::ImportanceReport report;
  const auto& catalog = desc::descriptor_catalog();
  for (std::size_t i = 0; i < count; ++i) {
    report.names.push_back(catalog[i].name);
    report.importance.push_back(1.0 / static_cast<double>(count));
    report.rank.push_back(static_cast<int>(i) + 1);
  }
  return report;
}

TEST(Cot, PromptHasFourBlocksInOrder) {
  const auto graph = chem::parse_smiles("CNCC(O)c1ccc(O)c(O)c1");
  const auto& task = TaskTable::builtin().get("bbb_martins");
  const auto bundle = assemble_cot_prompt("BBB prior text.", graph, "", catalog_report(30));
  EXPECT_EQ(bundle.descriptor_block.size(), 20u);
  ASSERT_EQ(bundle.warnings.size(), 1u);
  EXPECT_EQ(bundle.decomposition, "(no decomposition provided)");
  const auto text = render_cot_prompt(bundle, task);
  const auto preamble = text.find("BBB prior text.");
  const auto smiles = text.find(bundle.smiles);
  const auto decomposition = text.find("(no decomposition provided)");
  const auto descriptors = text.find("MolWt: ");
  ASSERT_NE(descriptors, std::string::npos);
  EXPECT_LT(preamble, smiles);
  EXPECT_LT(smiles, decomposition);
  EXPECT_LT(decomposition, descriptors);
  EXPECT_NE(text.find("HeavyAtomCount: 13\n"), std::string::npos);
  EXPECT_NE(text.find("'pass' or 'fail'"), std::string::npos);

  const auto small = assemble_cot_prompt("p", graph, "d", catalog_report(7));
  EXPECT_EQ(small.descriptor_block.size(), 7u);
  EXPECT_TRUE(small.warnings.empty());

  forest::ImportanceReport bogus{{"NotADescriptor"}, {1.0}, {1}};
  EXPECT_THROW(assemble_cot_prompt("p", graph, "d", bogus), ArgumentError);
}

TEST(Cot, AcceptsOnThirdAttempt) {
  const auto& task = TaskTable::builtin().get("bbb_martins");
  ScriptedGenerator stub({"Low TPSA. <answer>pass</answer>", "<stub-failure>",
                          "Polar and heavy. <answer>fail</answer> trailing", "<answer>pass</answer>"});
  const auto outcome = synthesize_cot("prompt", "fail", task, stub);
  EXPECT_TRUE(outcome.accepted);
  EXPECT_EQ(outcome.attempts.size(), 3u);
  EXPECT_EQ(stub.calls(), 3);
  EXPECT_FALSE(outcome.attempts[1].error.empty());
  EXPECT_EQ(outcome.rationale, "Polar and heavy. <answer>fail</answer>");
  const std::string tail = "<answer>fail</answer>";
  EXPECT_EQ(outcome.rationale.substr(outcome.rationale.size() - tail.size()), tail);

  const auto record = cot_record(task, "question <molecule>", CotPromptBundle{.smiles = "CCO"}, {1, 5},
                                 Label::negative, Split::train, outcome);
  EXPECT_EQ(record.family, Family::downstream_cot);
  EXPECT_EQ(record.answer, outcome.rationale);
}

TEST(Cot, RejectsAfterExactlyFiveFailures) {
  const auto& task = TaskTable::builtin().get("bbb_martins");
  ScriptedGenerator stub({"no tags at all", "<answer>pass</answer>"});
  const auto outcome = synthesize_cot("prompt", "fail", task, stub);
  EXPECT_FALSE(outcome.accepted);
  EXPECT_EQ(stub.calls(), 5);
  EXPECT_EQ(outcome.attempts.size(), 5u);
  EXPECT_TRUE(outcome.rationale.empty());
  EXPECT_THROW(cot_record(task, "q", {}, {}, Label::negative, Split::train, outcome), ArgumentError);
  EXPECT_THROW(synthesize_cot("prompt", "maybe", task, stub), ArgumentError);
}

TEST(Cot, CommandGeneratorPipesPrompt) {
  CommandGenerator echo("cat; printf ' seed=%s'  \"$MOLFORGE_SEED\"");
  EXPECT_EQ(echo.generate("hello <answer>yes</answer>", 0.6, 42), "hello <answer>yes</answer> seed=42");
  CommandGenerator failing("exit 3");
  EXPECT_THROW(failing.generate("x", 0.6, 1), Error);
}

TEST(Mixture, RespectsWeightsAndSeed) {
  std::map<std::string, std::vector<ExampleRecord>> pools;
  for (const auto* task : {"A", "B"}) {
    for (int i = 0; i < 10; ++i) {
      ExampleRecord record;
      record.task_id = task;
      record.answer = std::to_string(i);
      pools[task].push_back(record);
    }
  }
  MixtureSampler only_a({{{"A", 1.0}, {"B", 0.0}}, 1}, pools);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(only_a.next().first, "A");

  MixtureSampler equal({{{"A", 1.0}, {"B", 1.0}}, 2}, pools);
  int a_count = 0;
  for (int i = 0; i < 10000; ++i) a_count += equal.next().first == "A";
  EXPECT_GE(a_count, 4800);
  EXPECT_LE(a_count, 5200);

  MixtureSampler first({{{"A", 1.0}, {"B", 2.0}}, 3}, pools);
  MixtureSampler second({{{"A", 1.0}, {"B", 2.0}}, 3}, pools);
  EXPECT_EQ(first.sample(500), second.sample(500));

  EXPECT_THROW(MixtureSampler({{{"A", 0.0}}, 1}, pools), ArgumentError);
  EXPECT_THROW(MixtureSampler({{{"A", -1.0}}, 1}, pools), ArgumentError);
  EXPECT_THROW(MixtureSampler({{{"C", 1.0}}, 1}, pools), ArgumentError);
}

TEST(Jsonl, RoundTripAndErrors) {
  const auto& corpus = random_corpus();
  std::vector<ExampleRecord> records = build_smiles_recovery_examples(corpus, TemplateLibrary::builtin(), 4);
  records.resize(20);
  records[3].label = Label::positive;
  records[4].meta["note"] = "tab\tand \"quotes\" and unicode \xc3\xa9";
  const auto path = std::filesystem::temp_directory_path() / "molforge_forge_test.jsonl";
  export_jsonl(records, path);
  EXPECT_EQ(import_jsonl(path), records);
  const auto text = io::read_file(path);
  EXPECT_NE(text.find("\"fp_bits\":["), std::string::npos);
  std::filesystem::remove(path);

  auto lines = io::split_lines(text);
  std::string broken = lines[0] + "\n" + lines[1].substr(0, lines[1].size() / 2) + "\n";
  try {
    parse_jsonl(broken);
    FAIL() << "expected an error";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(record_from_json(R"({"task_id":"t"})"), DataError);
}

TEST(FreeText, ExternalAnswersAttachByCanonicalSmiles) {
  const std::vector<std::string> smiles{"OCC", "c1ccccc1"};
  const auto corpus = prepare_corpus(smiles);
  const auto prompts = build_free_text_prompts(corpus, "describe", TemplateLibrary::builtin(), 1);
  ASSERT_EQ(prompts.size(), 2u);
  const auto result =
      attach_external_answers(prompts, R"({"task_id":"describe","smiles":"CCO","answer":"Ethanol."})" "\n");
  ASSERT_EQ(result.records.size(), 1u);
  EXPECT_EQ(result.records[0].answer, "Ethanol.");
  EXPECT_EQ(result.missing, 1);
  EXPECT_THROW(attach_external_answers(prompts, "{oops\n"), DataError);
}

TEST(LabeledCsv, ParsesLabelsAndSplits) {
  const auto rows = parse_labeled_csv("smiles,label,split\nCCO,1,train\nCCN,no,test\nCCC,0.5,\n");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].label, 1.0);
  EXPECT_EQ(rows[1].label, 0.0);
  EXPECT_EQ(rows[1].split, Split::test);
  EXPECT_FALSE(rows[2].split.has_value());
  EXPECT_THROW(parse_labeled_csv("smiles,label\nCCO,abc\n"), DataError);
  EXPECT_THROW(parse_labeled_csv("mol,label\nCCO,1\n"), DataError);
  int test_count = 0;
  for (const auto& molecule : random_corpus().molecules) test_count += hash_split(molecule.smiles, 0) == Split::test;
  EXPECT_GT(test_count, 30);
  EXPECT_LT(test_count, 90);
}

}  // namespace
}  // namespace molforge::forge
