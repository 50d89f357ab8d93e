#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace molforge::forest {

struct ForestConfig {
  int n_trees = 300;
  // Candidate features per split; unset = floor(sqrt(non-constant features)), at least 1.
  std::optional<int> max_features;
  int min_leaf = 1;
  std::optional<int> max_depth;
  bool bootstrap = true;
};

// Internal nodes have feature >= 0 and two children; rows with
// value <= threshold go left. Leaves have feature == -1.
struct TreeNode {
  int feature = -1;
  double threshold = 0;
  int left = -1;
  int right = -1;
  double positive_fraction = 0;
  int sample_count = 0;
  // Impurity decrease of this split weighted by the node's share of the
  // tree's samples; 0 for leaves.
  double weighted_decrease = 0;

  bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // root at index 0
  double predict(std::span<const double> row) const;
  int depth() const;
};

struct RandomForest {
  std::vector<DecisionTree> trees;
  std::vector<std::string> feature_names;
  ForestConfig config;
  std::uint64_t seed = 0;

  int feature_count() const { return static_cast<int>(feature_names.size()); }
  // Mean of leaf positive fractions; throws ArgumentError on a length mismatch.
  double predict_proba(std::span<const double> row) const;
  std::vector<double> predict_proba(const Eigen::MatrixXd& rows) const;
};

// Rows are molecules, columns features. Labels are 0/1 with both classes
// present. Features constant over the whole training set are never split on
// and do not count toward the default max_features. Trees are grown in
// parallel on `threads` workers (0 = default); results do not depend on it.
RandomForest fit_forest(const Eigen::MatrixXd& features, std::span<const int> labels, const ForestConfig& config,
                        std::uint64_t seed, std::vector<std::string> feature_names = {}, std::size_t threads = 0);

struct ImportanceReport {
  std::vector<std::string> names;
  std::vector<double> importance;  // non-negative, sums to 1
  std::vector<int> rank;           // 1 = most important; ties by feature index
};

ImportanceReport gini_importance(const RandomForest& forest);

// Up to k names in rank order.
std::vector<std::string> top_k_features(const ImportanceReport& report, int k = 20);

// Versioned JSON checkpoint with config, seed, names and flattened nodes.
void save_forest(const RandomForest& forest, const std::filesystem::path& path);
RandomForest load_forest(const std::filesystem::path& path);
std::string forest_to_json(const RandomForest& forest);
RandomForest forest_from_json(const std::string& text);

}  // namespace molforge::forest
