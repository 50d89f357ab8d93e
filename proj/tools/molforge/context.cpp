#include "context.hpp"

#include <iostream>
#include <iterator>

#include "molforge/chem/smiles.hpp"
#include "molforge/common/io.hpp"
#include "molforge/common/parallel.hpp"

namespace molforge::cli {

const RunConfig& Context::config() {
  if (!config_) {
    std::optional<std::filesystem::path> file;
    if (global.config) file = *global.config;
    config_ = load_run_config(file);
  }
  return *config_;
}

std::size_t Context::threads() {
  if (global.threads && *global.threads > 0) return *global.threads;
  if (config().threads && *config().threads > 0) return *config().threads;
  return default_thread_count();
}

std::uint64_t Context::seed(std::string_view command) {
  if (global.seed) return *global.seed;
  if (config().seed) return *config().seed;
  throw UsageError(std::string(command) + " is stochastic: pass --seed or set 'seed' in the run config");
}

const forge::TaskTable& Context::tasks() {
  if (!tasks_) {
    tasks_ = config().tasks ? forge::TaskTable::load(config().tasks->string()) : forge::TaskTable::builtin();
  }
  return *tasks_;
}

const forge::TemplateLibrary& Context::templates() {
  if (!templates_) {
    templates_ = config().templates ? forge::TemplateLibrary::load(config().templates->string())
                                    : forge::TemplateLibrary::builtin();
  }
  return *templates_;
}

const pattern::PatternLibrary& Context::patterns() {
  if (!patterns_) {
    patterns_ = config().patterns ? pattern::PatternLibrary::load(config().patterns->string())
                                  : pattern::PatternLibrary::builtin();
  }
  return *patterns_;
}

const ground::Lexicon& Context::lexicon() {
  if (!lexicon_) lexicon_ = config().lexicon ? ground::Lexicon::load(*config().lexicon) : ground::Lexicon::builtin();
  return *lexicon_;
}

const forge::TaskSpec& Context::task(std::string_view id) {
  const forge::TaskSpec* found = nullptr;
  std::vector<std::string> candidates;
  for (const auto& spec : tasks().tasks()) {
    if (spec.task_id == id) return spec;
    if (spec.task_id.starts_with(id)) {
      found = &spec;
      candidates.push_back(spec.task_id);
    }
  }
  if (candidates.size() == 1) return *found;
  if (candidates.size() > 1) {
    std::string list;
    for (const auto& c : candidates) list += (list.empty() ? "" : ", ") + c;
    throw UsageError("task '" + std::string(id) + "' is ambiguous: " + list);
  }
  return tasks().get(id);  // throws, listing the known ids
}

void Context::emit(std::string_view text) const {
  if (global.out.empty() || global.out == "-") {
    std::cout << text;
    std::cout.flush();
  } else {
    io::write_file_atomic(global.out, text);
  }
}

std::string read_input(const std::string& path) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  if (!std::filesystem::exists(path)) throw DataError("input file not found: " + path);
  return io::read_file(path);
}

std::vector<SmilesInput> gather_smiles(const std::vector<std::string>& smiles, const std::string& input) {
  std::vector<SmilesInput> out;
  for (const auto& s : smiles) out.push_back({0, s});
  if (!input.empty()) {
    const auto lines = io::split_lines(read_input(input));
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const auto line = io::trim(lines[i]);
      if (line.empty() || line.front() == '#') continue;
      const auto end = line.find_first_of(" \t");
      out.push_back({i + 1, std::string(line.substr(0, end))});
    }
  }
  if (out.empty()) throw UsageError("no molecules given: pass --smiles or --input");
  return out;
}

std::string describe(const SmilesInput& input) {
  if (input.line == 0) return "'" + input.smiles + "'";
  return "line " + std::to_string(input.line) + " ('" + input.smiles + "')";
}

const std::vector<std::string>& core_descriptors() {
  static const std::vector<std::string> names{"MolWt",        "HeavyAtomCount",  "NumHDonors",       "NumHAcceptors",
                                              "TPSA",         "MolLogP",         "NumRotatableBonds", "RingCount",
                                              "NumAromaticRings", "FractionCSP3", "NumHeteroatoms",
                                              "NumAtomStereoCenters"};
  return names;
}

LabeledData load_labeled(const std::string& path, std::uint64_t seed, std::size_t threads) {
  const auto rows = forge::parse_labeled_csv(read_input(path));
  LabeledData data;
  data.smiles.resize(rows.size());
  data.graphs.resize(rows.size());
  data.labels.resize(rows.size());
  data.splits.resize(rows.size());
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    const auto where = path + ": data row " + std::to_string(i + 1);
    auto parsed = chem::try_parse_smiles(rows[i].smiles);
    if (!parsed.ok()) throw DataError(where + ": cannot parse SMILES '" + rows[i].smiles + "'");
    if (rows[i].label != 0.0 && rows[i].label != 1.0) throw DataError(where + ": label must be 0 or 1");
    data.graphs[i] = std::move(*parsed.graph);
    data.smiles[i] = chem::write_smiles(data.graphs[i]);
    data.labels[i] = static_cast<int>(rows[i].label);
    data.splits[i] = rows[i].split ? *rows[i].split : forge::hash_split(data.smiles[i], seed);
  });
  return data;
}

Eigen::MatrixXd descriptor_matrix(std::span<const chem::MolecularGraph> graphs,
                                  std::span<const desc::DescriptorSpec> specs, std::size_t threads) {
  Eigen::MatrixXd features(static_cast<Eigen::Index>(graphs.size()), static_cast<Eigen::Index>(specs.size()));
  parallel_for(graphs.size(), threads, [&](std::size_t i) {
    const auto values = desc::compute_descriptors(graphs[i], specs);
    for (std::size_t j = 0; j < specs.size(); ++j) {
      features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values.values.at(specs[j].name);
    }
  });
  return features;
}

std::vector<std::size_t> rows_in(const LabeledData& data, forge::Split split) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < data.splits.size(); ++i) {
    if (data.splits[i] == split) rows.push_back(i);
  }
  return rows;
}

}  // namespace molforge::cli
