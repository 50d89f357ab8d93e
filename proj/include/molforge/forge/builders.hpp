#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "molforge/chem/graph.hpp"
#include "molforge/desc/descriptors.hpp"
#include "molforge/forge/records.hpp"
#include "molforge/forge/templates.hpp"
#include "molforge/pattern/pattern.hpp"

namespace molforge::forge {

struct CorpusMolecule {
  std::string smiles;  // canonical
  chem::MolecularGraph graph;
  std::vector<int> fp_bits;
};

struct Corpus {
  std::vector<CorpusMolecule> molecules;
  std::vector<std::string> rejected;  // "input: reason" for unparseable lines
};

// Parses, canonicalizes and fingerprints every SMILES; unparseable inputs go
// to `rejected`. Output order follows input order for any thread count.
Corpus prepare_corpus(std::span<const std::string> smiles, std::size_t threads = 0);

struct SubstructureOptions {
  int quota = 50;  // positives per pattern; negatives match the count
  int min_positives = 3;
  std::uint64_t seed = 0;
  // Patterns in the unseen partition are emitted with split=test.
  bool unseen_to_test = true;
};

// Per pattern: up to quota matching molecules and the same number of
// non-matching ones, both drawn by seeded shuffle. Patterns with fewer than
// min_positives matches, or without any non-match, are dropped with a
// warning. Throws ArgumentError on an empty corpus.
std::vector<ExampleRecord> build_substructure_examples(const Corpus& corpus, const pattern::PatternLibrary& library,
                                                       const TemplateLibrary& templates,
                                                       const SubstructureOptions& options, std::size_t threads = 0);

// "3." for integers; one decimal, half away from zero, for reals ("0.6").
std::string format_property_answer(double value, desc::DescriptorKind kind);
// Inverse of format_property_answer; nullopt for non-numeric text.
std::optional<double> parse_property_answer(std::string_view text);
// Noun phrase for count questions or name for value questions.
std::string property_phrase(const desc::DescriptorSpec& spec);

// One record per (molecule, descriptor). Throws on an empty corpus.
std::vector<ExampleRecord> build_property_examples(const Corpus& corpus, std::span<const desc::DescriptorSpec> specs,
                                                   const TemplateLibrary& templates, std::uint64_t seed,
                                                   std::size_t threads = 0);

// Answer = the canonical SMILES.
std::vector<ExampleRecord> build_smiles_recovery_examples(const Corpus& corpus, const TemplateLibrary& templates,
                                                          std::uint64_t seed);

// Prompt-only records for an externally answered task (empty answers).
std::vector<ExampleRecord> build_free_text_prompts(const Corpus& corpus, const std::string& task_id,
                                                   const TemplateLibrary& templates, std::uint64_t seed);

struct AttachResult {
  std::vector<ExampleRecord> records;
  int missing = 0;  // prompts without an external answer, dropped
};

// Answers come from JSONL objects {"task_id", "smiles", "answer"}; the SMILES
// key is canonicalized before lookup. Throws DataError on malformed lines.
AttachResult attach_external_answers(std::span<const ExampleRecord> prompts, std::string_view answers_jsonl);

// Repeats seeded-sampled minority train records until both classes have the
// same count; valid/test records pass through untouched. Duplicates are
// exact copies appended after the originals.
std::vector<ExampleRecord> upsample_train(std::span<const ExampleRecord> records, std::uint64_t seed);

struct DownstreamInput {
  std::string smiles;
  Label label = Label::negative;
  Split split = Split::train;
};

// YN records ("Yes."/"No.") for one task, balanced by upsample_train.
// Throws ArgumentError when the train split lacks a class and DataError on an
// unparseable SMILES.
std::vector<ExampleRecord> build_downstream_yn(std::span<const DownstreamInput> inputs, const TaskSpec& task,
                                               const TemplateLibrary& templates, std::uint64_t seed);

// Recomputes every substructure, property and SMILES-recovery answer from the
// record's SMILES (pattern from meta "pattern", descriptor from meta
// "descriptor") and returns one "line N: reason" entry per disagreement.
// Other families are not checked.
std::vector<std::string> recheck_records(std::span<const ExampleRecord> records,
                                         const pattern::PatternLibrary& library, std::size_t threads = 0);

// The chain-of-thought question for a molecule (without the answer).
std::string downstream_cot_question(const TaskSpec& task, const TemplateLibrary& templates, std::uint64_t seed,
                                    std::size_t index);

}  // namespace molforge::forge
