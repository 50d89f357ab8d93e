#include "run_config.hpp"

#include <cstdlib>
#include <set>
#include <spdlog/spdlog.h>
#include <yaml-cpp/yaml.h>

#include "molforge/common/error.hpp"

namespace molforge::cli {
namespace {

namespace fs = std::filesystem;

YAML::Node load_yaml(const fs::path& file) {
  if (!fs::exists(file)) throw DataError("config file not found: " + file.string());
  try {
    return YAML::LoadFile(file.string());
  } catch (const YAML::Exception& e) {
    throw DataError(file.string() + ": " + e.what());
  }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& where) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw DataError(where + ": expected a " + (std::is_same_v<T, bool> ? "boolean" : "number or string") +
                    " at line " + std::to_string(node.Mark().line + 1));
  }
}

void warn_unknown(const YAML::Node& map, const std::set<std::string>& known, const std::string& where) {
  for (const auto& item : map) {
    const auto key = item.first.as<std::string>();
    if (!known.contains(key)) spdlog::warn("{}: ignoring unknown key '{}'", where, key);
  }
}

forge::MixtureConfig parse_mixture(const YAML::Node& node, const std::string& where) {
  if (!node.IsMap() || !node["weights"] || !node["weights"].IsMap()) {
    throw DataError(where + ": mixture needs a 'weights' map of task -> weight");
  }
  warn_unknown(node, {"weights", "seed"}, where + " mixture");
  forge::MixtureConfig mixture;
  for (const auto& item : node["weights"]) {
    mixture.weights[item.first.as<std::string>()] = scalar<double>(item.second, where + " mixture weight");
  }
  if (node["seed"]) mixture.seed = scalar<std::uint64_t>(node["seed"], where + " mixture seed");
  return mixture;
}

void parse_forest(const YAML::Node& node, forest::ForestConfig& config, const std::string& where) {
  warn_unknown(node, {"n_trees", "max_features", "min_leaf", "max_depth", "bootstrap"}, where + " forest");
  if (node["n_trees"]) config.n_trees = scalar<int>(node["n_trees"], where);
  if (node["max_features"] && !node["max_features"].IsNull()) {
    config.max_features = scalar<int>(node["max_features"], where);
  }
  if (node["min_leaf"]) config.min_leaf = scalar<int>(node["min_leaf"], where);
  if (node["max_depth"] && !node["max_depth"].IsNull()) config.max_depth = scalar<int>(node["max_depth"], where);
  if (node["bootstrap"]) config.bootstrap = scalar<bool>(node["bootstrap"], where);
}

void parse_toy(const YAML::Node& node, toy::ToyDecoderConfig& model, toy::TrainConfig& train,
               const std::string& where) {
  warn_unknown(node, {"model", "train"}, where + " toy");
  if (const auto m = node["model"]) {
    warn_unknown(m, {"d_model", "n_layers", "n_heads", "max_seq_len", "mlp_ratio"}, where + " toy.model");
    if (m["d_model"]) model.d_model = scalar<int>(m["d_model"], where);
    if (m["n_layers"]) model.n_layers = scalar<int>(m["n_layers"], where);
    if (m["n_heads"]) model.n_heads = scalar<int>(m["n_heads"], where);
    if (m["max_seq_len"]) model.max_seq_len = scalar<int>(m["max_seq_len"], where);
    if (m["mlp_ratio"]) model.mlp_ratio = scalar<int>(m["mlp_ratio"], where);
  }
  if (const auto t = node["train"]) {
    warn_unknown(t, {"steps", "batch_size", "lr_backbone", "lr_projector", "beta2", "epsilon", "log_every"},
                 where + " toy.train");
    if (t["steps"]) train.steps = scalar<int>(t["steps"], where);
    if (t["batch_size"]) train.batch_size = scalar<int>(t["batch_size"], where);
    if (t["lr_backbone"]) train.lr_backbone = scalar<double>(t["lr_backbone"], where);
    if (t["lr_projector"]) train.lr_projector = scalar<double>(t["lr_projector"], where);
    if (t["beta2"]) train.beta2 = scalar<double>(t["beta2"], where);
    if (t["epsilon"]) train.epsilon = scalar<double>(t["epsilon"], where);
    if (t["log_every"]) train.log_every = scalar<int>(t["log_every"], where);
  }
}

// Explicit entries must exist; unset ones fall back to data_dir/default_name.
std::optional<fs::path> resolve_asset(const YAML::Node& root, const char* key, const char* default_name,
                                      const std::optional<fs::path>& data_dir, const fs::path& base,
                                      const std::string& where) {
  if (root[key]) {
    fs::path path = scalar<std::string>(root[key], where);
    if (path.is_relative()) path = data_dir ? *data_dir / path : base / path;
    if (!fs::exists(path)) throw DataError(where + ": " + key + " file not found: " + path.string());
    return path;
  }
  if (data_dir && fs::exists(*data_dir / default_name)) return *data_dir / default_name;
  return std::nullopt;
}

}  // namespace

RunConfig load_run_config(const std::optional<fs::path>& file) {
  RunConfig config;
  YAML::Node root(YAML::NodeType::Map);
  fs::path base = fs::current_path();
  std::string where = "run config";
  if (file) {
    root = load_yaml(*file);
    if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    if (!root.IsMap()) throw DataError(file->string() + ": expected a mapping at the top level");
    base = fs::absolute(*file).parent_path();
    where = file->string();
    warn_unknown(root, {"data_dir", "seed", "threads", "tasks", "templates", "patterns", "lexicon", "mixture",
                        "forest", "toy"},
                 where);
  }
  if (const char* env = std::getenv("MOLFORGE_DATA_DIR"); env != nullptr && *env != '\0') {
    config.data_dir = fs::absolute(env);
  } else if (root["data_dir"]) {
    fs::path dir = scalar<std::string>(root["data_dir"], where);
    config.data_dir = dir.is_relative() ? base / dir : dir;
  }
  if (config.data_dir && !fs::is_directory(*config.data_dir)) {
    throw DataError("data directory not found: " + config.data_dir->string());
  }
  if (root["seed"]) config.seed = scalar<std::uint64_t>(root["seed"], where);
  if (root["threads"]) config.threads = scalar<std::size_t>(root["threads"], where);
  config.tasks = resolve_asset(root, "tasks", "tasks.tsv", config.data_dir, base, where);
  config.templates = resolve_asset(root, "templates", "templates.tsv", config.data_dir, base, where);
  config.patterns = resolve_asset(root, "patterns", "patterns.tsv", config.data_dir, base, where);
  config.lexicon = resolve_asset(root, "lexicon", "lexicon.tsv", config.data_dir, base, where);
  if (root["mixture"]) config.mixture = parse_mixture(root["mixture"], where);
  if (root["forest"]) parse_forest(root["forest"], config.forest, where);
  if (root["toy"]) parse_toy(root["toy"], config.toy_model, config.toy_train, where);
  return config;
}

forge::MixtureConfig load_mixture_config(const fs::path& file) {
  auto root = load_yaml(file);
  if (root.IsMap() && root["mixture"]) root = root["mixture"];
  return parse_mixture(root, file.string());
}

}  // namespace molforge::cli
