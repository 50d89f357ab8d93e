#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "molforge/forest/forest.hpp"
#include "molforge/forge/mixture.hpp"
#include "molforge/toy/model.hpp"
#include "molforge/toy/train.hpp"

namespace molforge::cli {

// Settings shared by every subcommand, read from one YAML file. Asset paths
// are absolute after loading and every referenced file exists.
struct RunConfig {
  std::optional<std::filesystem::path> data_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::filesystem::path> tasks;      // task table (TSV)
  std::optional<std::filesystem::path> templates;  // template library (TSV)
  std::optional<std::filesystem::path> patterns;   // pattern library (TSV)
  std::optional<std::filesystem::path> lexicon;    // groundedness lexicon (TSV)
  std::optional<forge::MixtureConfig> mixture;
  forest::ForestConfig forest;
  toy::ToyDecoderConfig toy_model;
  toy::TrainConfig toy_train;
};

// Relative data_dir resolves against the config file's directory; asset paths
// resolve against data_dir. MOLFORGE_DATA_DIR, when set, replaces data_dir.
// Assets left unset are taken from data_dir under their default file names
// when present there, and from the built-in tables otherwise. Throws
// DataError naming the path when a file is missing or malformed.
RunConfig load_run_config(const std::optional<std::filesystem::path>& file);

// Weights and seed for the dataset mixture, in the same YAML shape as the
// `mixture` section of the run config.
forge::MixtureConfig load_mixture_config(const std::filesystem::path& file);

}  // namespace molforge::cli
