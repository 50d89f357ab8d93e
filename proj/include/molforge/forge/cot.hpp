#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "molforge/chem/graph.hpp"
#include "molforge/forest/forest.hpp"
#include "molforge/forge/records.hpp"
#include "molforge/forge/templates.hpp"

namespace molforge::forge {

struct DescriptorLine {
  std::string name;
  double value = 0;
  bool integer = false;
};

// The four prompt elements, in fixed order.
struct CotPromptBundle {
  std::string preamble;
  std::string smiles;  // canonical
  std::string decomposition;
  std::vector<DescriptorLine> descriptor_block;  // importance rank order
  std::vector<std::string> warnings;
};

// Takes the top min(k, p) descriptors of the report and evaluates them on the
// molecule. Report names must be catalogued descriptors (ArgumentError
// otherwise). Empty preamble or decomposition yields a placeholder block and
// a warning.
CotPromptBundle assemble_cot_prompt(std::string preamble, const chem::MolecularGraph& molecule,
                                    std::string decomposition, const forest::ImportanceReport& importance, int k = 20);

// Blocks in order: preamble, SMILES, decomposition, descriptor values
// ("name: value", one decimal for reals), then the answer instruction.
std::string render_cot_prompt(const CotPromptBundle& bundle, const TaskSpec& task);

// Text generator (prompt, temperature, seed) -> text. Failures throw.
class TextGenerator {
 public:
  virtual ~TextGenerator() = default;
  virtual std::string generate(const std::string& prompt, double temperature, std::uint64_t seed) = 0;
};

// Replays scripted responses in order, repeating the last one; an entry equal
// to kStubFailure throws instead.
class ScriptedGenerator : public TextGenerator {
 public:
  static constexpr std::string_view kStubFailure = "<stub-failure>";
  explicit ScriptedGenerator(std::vector<std::string> responses);
  std::string generate(const std::string& prompt, double temperature, std::uint64_t seed) override;
  int calls() const { return calls_; }

 private:
  std::vector<std::string> responses_;
  int calls_ = 0;
};

// Runs a shell command per call, feeding the prompt on standard input and
// reading the response from standard output. MOLFORGE_TEMPERATURE and
// MOLFORGE_SEED are set in the child's environment. Non-zero exit throws.
class CommandGenerator : public TextGenerator {
 public:
  explicit CommandGenerator(std::string command);
  std::string generate(const std::string& prompt, double temperature, std::uint64_t seed) override;

 private:
  std::string command_;
};

struct CotAttempt {
  std::string response;
  std::optional<std::string> parsed_label;
  std::string error;  // set when the generator threw
};

struct CotOutcome {
  bool accepted = false;
  std::string rationale;  // accepted response, ending with <answer>label</answer>
  std::vector<CotAttempt> attempts;
};

struct CotOptions {
  int max_attempts = 5;
  double temperature = 0.7;
  std::uint64_t seed = 0;
};

// Queries the generator until the final <answer> tag equals the expected
// label (case-insensitive), at most max_attempts times. Text after the
// accepted closing tag is dropped. Throws ArgumentError when the expected
// label is outside the task vocabulary.
CotOutcome synthesize_cot(const std::string& prompt, const std::string& expected_label, const TaskSpec& task,
                          TextGenerator& generator, const CotOptions& options = {});

// The training record for an accepted outcome.
ExampleRecord cot_record(const TaskSpec& task, const std::string& question, const CotPromptBundle& bundle,
                         std::vector<int> fp_bits, Label label, Split split, const CotOutcome& outcome);

}  // namespace molforge::forge
