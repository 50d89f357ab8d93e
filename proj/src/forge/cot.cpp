#include "molforge/forge/cot.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <spdlog/spdlog.h>

#include "molforge/chem/smiles.hpp"
#include "molforge/common/error.hpp"
#include "molforge/common/io.hpp"
#include "molforge/common/rng.hpp"
#include "molforge/desc/descriptors.hpp"
#include "molforge/metrics/metrics.hpp"

namespace molforge::forge {
namespace {

constexpr std::string_view kNoPreamble = "(no preamble provided)";
constexpr std::string_view kNoDecomposition = "(no decomposition provided)";

std::string format_descriptor(const DescriptorLine& line) {
  char buffer[64];
  if (line.integer) {
    std::snprintf(buffer, sizeof buffer, "%lld", static_cast<long long>(std::llround(line.value)));
  } else {
    double rounded = std::round(line.value * 10.0) / 10.0;
    if (rounded == 0.0) rounded = 0.0;
    std::snprintf(buffer, sizeof buffer, "%.1f", rounded);
  }
  return buffer;
}

// Single-quoted for /bin/sh.
std::string shell_quote(std::string_view text) {
  std::string out = "'";
  for (char c : text) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

}  // namespace

CotPromptBundle assemble_cot_prompt(std::string preamble, const chem::MolecularGraph& molecule,
                                    std::string decomposition, const forest::ImportanceReport& importance, int k) {
  if (k < 1) throw ArgumentError("descriptor block size must be at least 1");
  CotPromptBundle bundle;
  bundle.smiles = chem::write_smiles(molecule);
  if (io::trim(preamble).empty()) {
    bundle.warnings.push_back("empty literature preamble for " + bundle.smiles);
    preamble = std::string(kNoPreamble);
  }
  if (io::trim(decomposition).empty()) {
    bundle.warnings.push_back("empty decomposition for " + bundle.smiles);
    decomposition = std::string(kNoDecomposition);
  }
  bundle.preamble = std::move(preamble);
  bundle.decomposition = std::move(decomposition);

  const auto names = forest::top_k_features(importance, k);
  const auto specs = desc::descriptor_specs(names);
  const auto values = desc::compute_descriptors(molecule, specs);
  for (const auto& spec : specs) {
    bundle.descriptor_block.push_back(
        {spec.name, values.values.at(spec.name), spec.kind == desc::DescriptorKind::integer});
  }
  for (const auto& warning : bundle.warnings) spdlog::warn("{}", warning);
  return bundle;
}

std::string render_cot_prompt(const CotPromptBundle& bundle, const TaskSpec& task) {
  std::string out;
  out += "## Literature preamble\n" + bundle.preamble + "\n\n";
  out += "## Molecule (canonical SMILES)\n" + bundle.smiles + "\n\n";
  out += "## Decomposition\n" + bundle.decomposition + "\n\n";
  out += "## Descriptor values\n";
  for (const auto& line : bundle.descriptor_block) out += line.name + ": " + format_descriptor(line) + "\n";
  out += "\n## Task\n" + task.display_name + ". Write a chain of thought about this molecule that ends with the label. " +
         cot_instruction(task) + "\n";
  return out;
}

ScriptedGenerator::ScriptedGenerator(std::vector<std::string> responses) : responses_(std::move(responses)) {
  if (responses_.empty()) throw ArgumentError("scripted generator needs at least one response");
}

std::string ScriptedGenerator::generate(const std::string&, double, std::uint64_t) {
  const auto index = std::min(static_cast<std::size_t>(calls_), responses_.size() - 1);
  ++calls_;
  if (responses_[index] == kStubFailure) throw Error("scripted generator failure");
  return responses_[index];
}

CommandGenerator::CommandGenerator(std::string command) : command_(std::move(command)) {
  if (io::trim(command_).empty()) throw ArgumentError("generator command is empty");
}

std::string CommandGenerator::generate(const std::string& prompt, double temperature, std::uint64_t seed) {
  static std::atomic<std::uint64_t> counter{0};
  const auto prompt_path = std::filesystem::temp_directory_path() /
                           ("molforge-prompt-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  io::write_file_atomic(prompt_path, prompt);
  const std::string shell = "MOLFORGE_TEMPERATURE=" + std::to_string(temperature) +
                            " MOLFORGE_SEED=" + std::to_string(seed) + " /bin/sh -c " + shell_quote(command_) + " < " +
                            shell_quote(prompt_path.string());
  FILE* pipe = ::popen(shell.c_str(), "r");
  if (pipe == nullptr) {
    std::filesystem::remove(prompt_path);
    throw Error("cannot start generator command: " + command_);
  }
  std::string output;
  std::array<char, 4096> buffer{};
  std::size_t got = 0;
  while ((got = std::fread(buffer.data(), 1, buffer.size(), pipe)) > 0) output.append(buffer.data(), got);
  const int status = ::pclose(pipe);
  std::filesystem::remove(prompt_path);
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw Error("generator command failed (status " + std::to_string(status) + "): " + command_);
  }
  return output;
}

CotOutcome synthesize_cot(const std::string& prompt, const std::string& expected_label, const TaskSpec& task,
                          TextGenerator& generator, const CotOptions& options) {
  if (options.max_attempts < 1) throw ArgumentError("max_attempts must be at least 1");
  const auto vocab = task.cot_vocab();
  const auto expected = io::to_lower(io::trim(expected_label));
  const bool known = std::any_of(vocab.begin(), vocab.end(), [&](const std::string& v) { return io::to_lower(v) == expected; });
  if (!known) {
    throw ArgumentError("expected label '" + expected_label + "' is not in the vocabulary of task " + task.task_id);
  }
  CotOutcome outcome;
  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    CotAttempt record;
    try {
      record.response =
          generator.generate(prompt, options.temperature, derive_seed(options.seed, static_cast<std::uint64_t>(attempt)));
      record.parsed_label = metrics::parse_final_answer(record.response, metrics::AnswerFormat::cot, vocab);
    } catch (const std::exception& e) {
      record.error = e.what();
    }
    const bool match = record.parsed_label && io::to_lower(*record.parsed_label) == expected;
    outcome.attempts.push_back(record);
    if (match) {
      constexpr std::string_view kClose = "</answer>";
      const auto close = record.response.rfind(kClose);
      outcome.rationale = record.response.substr(0, close + kClose.size());
      outcome.accepted = true;
      break;
    }
  }
  return outcome;
}

ExampleRecord cot_record(const TaskSpec& task, const std::string& question, const CotPromptBundle& bundle,
                         std::vector<int> fp_bits, Label label, Split split, const CotOutcome& outcome) {
  if (!outcome.accepted) throw ArgumentError("cannot build a record from a rejected chain of thought");
  ExampleRecord record;
  record.task_id = task.task_id;
  record.family = Family::downstream_cot;
  record.prompt = question;
  record.smiles = bundle.smiles;
  record.fp_bits = std::move(fp_bits);
  record.answer = outcome.rationale;
  record.label = label;
  record.split = split;
  record.meta = {{"attempts", std::to_string(outcome.attempts.size())}};
  return record;
}

}  // namespace molforge::forge
