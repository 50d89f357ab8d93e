#pragma once

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "molforge/chem/graph.hpp"
#include "molforge/common/error.hpp"
#include "molforge/desc/descriptors.hpp"
#include "molforge/forge/records.hpp"
#include "molforge/forge/templates.hpp"
#include "molforge/ground/groundedness.hpp"
#include "molforge/pattern/pattern.hpp"
#include "run_config.hpp"

namespace molforge::cli {

// Bad flags or flag combinations; exits with status 1.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct GlobalOptions {
  std::optional<std::string> config;
  std::optional<std::size_t> threads;
  std::optional<std::uint64_t> seed;
  std::string out;  // empty or "-" = standard output
  std::string log_level = "info";
};

class Context {
 public:
  GlobalOptions global;

  const RunConfig& config();
  // --threads, then the config, then every available core.
  std::size_t threads();
  // --seed, then the config; throws UsageError when neither is set.
  std::uint64_t seed(std::string_view command);

  const forge::TaskTable& tasks();
  const forge::TemplateLibrary& templates();
  const pattern::PatternLibrary& patterns();
  const ground::Lexicon& lexicon();
  // Exact id, or an unambiguous prefix of one ("bbb" -> "bbb_martins").
  const forge::TaskSpec& task(std::string_view id);

  // Writes to --out atomically, or to standard output.
  void emit(std::string_view text) const;

 private:
  std::optional<RunConfig> config_;
  std::optional<forge::TaskTable> tasks_;
  std::optional<forge::TemplateLibrary> templates_;
  std::optional<pattern::PatternLibrary> patterns_;
  std::optional<ground::Lexicon> lexicon_;
};

// Returns the process exit status.
using Runner = std::function<int(Context&)>;

struct Registry {
  std::vector<std::pair<CLI::App*, Runner>> commands;
};

// "-" reads standard input.
std::string read_input(const std::string& path);

struct SmilesInput {
  std::size_t line = 0;  // 0 for --smiles values
  std::string smiles;
};

// --smiles values followed by the first whitespace-separated field of every
// non-blank, non-'#' line of the input file.
std::vector<SmilesInput> gather_smiles(const std::vector<std::string>& smiles, const std::string& input);

std::string describe(const SmilesInput& input);

// The twelve scalar descriptors, used when no names are requested.
const std::vector<std::string>& core_descriptors();

// A labeled CSV with parsed molecules and a split for every row.
struct LabeledData {
  std::vector<std::string> smiles;  // canonical
  std::vector<chem::MolecularGraph> graphs;
  std::vector<int> labels;  // 0/1
  std::vector<forge::Split> splits;
};

// Rows without a split column are assigned by forge::hash_split(seed).
// Throws DataError on unparseable SMILES or labels other than 0 and 1.
LabeledData load_labeled(const std::string& path, std::uint64_t seed, std::size_t threads);

// Rows are molecules, columns follow `specs`.
Eigen::MatrixXd descriptor_matrix(std::span<const chem::MolecularGraph> graphs,
                                  std::span<const desc::DescriptorSpec> specs, std::size_t threads);

// Rows whose split is `split`.
std::vector<std::size_t> rows_in(const LabeledData& data, forge::Split split);

void add_chem_commands(CLI::App& app, Registry& registry);
void add_forge_commands(CLI::App& app, Registry& registry);
void add_model_commands(CLI::App& app, Registry& registry);
void add_ground_commands(CLI::App& app, Registry& registry);

}  // namespace molforge::cli
