#include "molforge/forest/forest.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>

#include "molforge/common/error.hpp"
#include "molforge/common/io.hpp"
#include "molforge/common/parallel.hpp"
#include "molforge/common/rng.hpp"

namespace molforge::forest {
namespace {

constexpr int kCheckpointVersion = 1;
constexpr const char* kCheckpointFormat = "molforge-random-forest";

double gini(double positives, double n) {
  if (n <= 0) return 0;
  const double p = positives / n;
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

struct Split {
  int feature = -1;
  double threshold = 0;
  double decrease = -1;
};

class TreeGrower {
 public:
  TreeGrower(const Eigen::MatrixXd& x, std::span<const int> y, const std::vector<int>& usable, int max_features,
             const ForestConfig& config, Rng& rng)
      : x_(x), y_(y), usable_(usable), max_features_(max_features), config_(config), rng_(rng) {}

  DecisionTree grow(std::vector<int> samples) {
    root_count_ = static_cast<double>(samples.size());
    DecisionTree tree;
    struct Pending {
      int node;
      std::vector<int> samples;
      int depth;
    };
    tree.nodes.emplace_back();
    std::vector<Pending> stack;
    stack.push_back({0, std::move(samples), 0});
    while (!stack.empty()) {
      Pending job = std::move(stack.back());
      stack.pop_back();
      const int n = static_cast<int>(job.samples.size());
      int positives = 0;
      for (int s : job.samples) positives += y_[static_cast<std::size_t>(s)];
      TreeNode& node = tree.nodes[static_cast<std::size_t>(job.node)];
      node.sample_count = n;
      node.positive_fraction = n > 0 ? static_cast<double>(positives) / n : 0.0;

      const bool pure = positives == 0 || positives == n;
      const bool depth_reached = config_.max_depth && job.depth >= *config_.max_depth;
      if (pure || depth_reached || n < 2 * config_.min_leaf) continue;
      const Split split = best_split(job.samples, positives);
      if (split.feature < 0) continue;

      std::vector<int> left, right;
      for (int s : job.samples) {
        (x_(s, split.feature) <= split.threshold ? left : right).push_back(s);
      }
      const int left_id = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      TreeNode& parent = tree.nodes[static_cast<std::size_t>(job.node)];
      parent.feature = split.feature;
      parent.threshold = split.threshold;
      parent.left = left_id;
      parent.right = left_id + 1;
      parent.weighted_decrease = split.decrease / root_count_;
      stack.push_back({left_id + 1, std::move(right), job.depth + 1});
      stack.push_back({left_id, std::move(left), job.depth + 1});
    }
    return tree;
  }

 private:
  // Features are drawn without replacement until max_features of them vary
  // inside the node (or the pool runs out); the best of those wins, ties
  // going to the lower feature index and then the lower threshold.
  Split best_split(const std::vector<int>& samples, int positives) {
    std::vector<int> pool = usable_;
    std::vector<int> candidates;
    std::size_t remaining = pool.size();
    while (remaining > 0 && static_cast<int>(candidates.size()) < max_features_) {
      const auto pick = static_cast<std::size_t>(rng_.uniform_index(remaining));
      const int feature = pool[pick];
      std::swap(pool[pick], pool[remaining - 1]);
      --remaining;
      const double first = x_(samples.front(), feature);
      const bool varies = std::any_of(samples.begin(), samples.end(), [&](int s) { return x_(s, feature) != first; });
      if (varies) candidates.push_back(feature);
    }
    std::sort(candidates.begin(), candidates.end());

    const double n = static_cast<double>(samples.size());
    const double parent_impurity = n * gini(positives, n);
    Split best;
    std::vector<std::pair<double, int>> column(samples.size());
    for (int feature : candidates) {
      for (std::size_t i = 0; i < samples.size(); ++i) {
        column[i] = {x_(samples[i], feature), y_[static_cast<std::size_t>(samples[i])]};
      }
      std::sort(column.begin(), column.end());
      double left_pos = 0;
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        left_pos += column[i].second;
        if (column[i].first == column[i + 1].first) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = n - nl;
        if (nl < config_.min_leaf || nr < config_.min_leaf) continue;
        const double decrease = parent_impurity - nl * gini(left_pos, nl) - nr * gini(positives - left_pos, nr);
        if (decrease > best.decrease + 1e-12 * n) {
          double threshold = (column[i].first + column[i + 1].first) / 2.0;
          if (threshold >= column[i + 1].first) threshold = column[i].first;
          best = {feature, threshold, decrease};
        }
      }
    }
    if (best.feature >= 0) best.decrease = std::max(0.0, best.decrease);
    return best;
  }

  const Eigen::MatrixXd& x_;
  std::span<const int> y_;
  const std::vector<int>& usable_;
  int max_features_;
  const ForestConfig& config_;
  Rng& rng_;
  double root_count_ = 1;
};

void check_config(const ForestConfig& config) {
  if (config.n_trees < 1) throw ArgumentError("n_trees must be at least 1");
  if (config.min_leaf < 1) throw ArgumentError("min_leaf must be at least 1");
  if (config.max_features && *config.max_features < 1) throw ArgumentError("max_features must be at least 1");
  if (config.max_depth && *config.max_depth < 0) throw ArgumentError("max_depth must be non-negative");
}

}  // namespace

double DecisionTree::predict(std::span<const double> row) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& node = nodes[i];
    i = static_cast<std::size_t>(row[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right);
  }
  return nodes[i].positive_fraction;
}

int DecisionTree::depth() const {
  std::vector<int> depth(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, depth[i]);
    if (nodes[i].is_leaf()) continue;
    depth[static_cast<std::size_t>(nodes[i].left)] = depth[i] + 1;
    depth[static_cast<std::size_t>(nodes[i].right)] = depth[i] + 1;
  }
  return deepest;
}

double RandomForest::predict_proba(std::span<const double> row) const {
  if (static_cast<int>(row.size()) != feature_count()) {
    throw ArgumentError("feature row has " + std::to_string(row.size()) + " values, forest expects " +
                        std::to_string(feature_count()));
  }
  double total = 0;
  for (const auto& tree : trees) total += tree.predict(row);
  return std::clamp(total / static_cast<double>(trees.size()), 0.0, 1.0);
}

std::vector<double> RandomForest::predict_proba(const Eigen::MatrixXd& rows) const {
  std::vector<double> out(static_cast<std::size_t>(rows.rows()));
  std::vector<double> row(static_cast<std::size_t>(rows.cols()));
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) row[static_cast<std::size_t>(c)] = rows(r, c);
    out[static_cast<std::size_t>(r)] = predict_proba(row);
  }
  return out;
}

RandomForest fit_forest(const Eigen::MatrixXd& features, std::span<const int> labels, const ForestConfig& config,
                        std::uint64_t seed, std::vector<std::string> feature_names, std::size_t threads) {
  check_config(config);
  const auto n = static_cast<std::size_t>(features.rows());
  const auto p = static_cast<int>(features.cols());
  if (labels.size() != n) throw ArgumentError("label count does not match feature rows");
  if (n < 2) throw ArgumentError("a forest needs at least 2 samples");
  if (p < 1) throw ArgumentError("a forest needs at least 1 feature");
  for (std::size_t r = 0; r < n; ++r) {
    if (labels[r] != 0 && labels[r] != 1) throw ArgumentError("labels must be 0 or 1");
    for (int c = 0; c < p; ++c) {
      if (!std::isfinite(features(static_cast<Eigen::Index>(r), c))) {
        throw ArgumentError("non-finite feature value at row " + std::to_string(r) + ", column " + std::to_string(c));
      }
    }
  }
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  if (positives == 0 || static_cast<std::size_t>(positives) == n) {
    throw ArgumentError("labels contain a single class");
  }
  if (feature_names.empty()) {
    for (int c = 0; c < p; ++c) feature_names.push_back("f" + std::to_string(c));
  }
  if (static_cast<int>(feature_names.size()) != p) throw ArgumentError("feature name count does not match columns");

  std::vector<int> usable;
  for (int c = 0; c < p; ++c) {
    if ((features.col(c).array() != features(0, c)).any()) usable.push_back(c);
  }
  const int max_features =
      config.max_features ? *config.max_features
                          : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(usable.size())))));

  RandomForest forest;
  forest.feature_names = std::move(feature_names);
  forest.config = config;
  forest.seed = seed;
  forest.trees.resize(static_cast<std::size_t>(config.n_trees));
  parallel_for(forest.trees.size(), threads, [&](std::size_t t) {
    Rng rng(derive_seed(seed, t));
    std::vector<int> samples(n);
    if (config.bootstrap) {
      for (auto& s : samples) s = static_cast<int>(rng.uniform_index(n));
    } else {
      std::iota(samples.begin(), samples.end(), 0);
    }
    TreeGrower grower(features, labels, usable, max_features, config, rng);
    forest.trees[t] = grower.grow(std::move(samples));
  });
  return forest;
}

ImportanceReport gini_importance(const RandomForest& forest) {
  const auto p = static_cast<std::size_t>(forest.feature_count());
  ImportanceReport report;
  report.names = forest.feature_names;
  report.importance.assign(p, 0.0);
  for (const auto& tree : forest.trees) {
    for (const auto& node : tree.nodes) {
      if (!node.is_leaf()) report.importance[static_cast<std::size_t>(node.feature)] += node.weighted_decrease;
    }
  }
  for (auto& v : report.importance) v /= static_cast<double>(forest.trees.size());
  const double total = std::accumulate(report.importance.begin(), report.importance.end(), 0.0);
  if (total > 0) {
    for (auto& v : report.importance) v /= total;
  } else {
    // No impurity decrease anywhere: spread evenly over the features split
    // on, or over all features when no tree split at all.
    std::vector<bool> used(p, false);
    for (const auto& tree : forest.trees) {
      for (const auto& node : tree.nodes) {
        if (!node.is_leaf()) used[static_cast<std::size_t>(node.feature)] = true;
      }
    }
    auto used_count = static_cast<std::size_t>(std::count(used.begin(), used.end(), true));
    if (used_count == 0) {
      used.assign(p, true);
      used_count = p;
    }
    for (std::size_t f = 0; f < p; ++f) report.importance[f] = used[f] ? 1.0 / static_cast<double>(used_count) : 0.0;
  }
  std::vector<int> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return report.importance[static_cast<std::size_t>(a)] > report.importance[static_cast<std::size_t>(b)];
  });
  report.rank.assign(p, 0);
  for (std::size_t r = 0; r < order.size(); ++r) report.rank[static_cast<std::size_t>(order[r])] = static_cast<int>(r) + 1;
  return report;
}

std::vector<std::string> top_k_features(const ImportanceReport& report, int k) {
  if (k < 1) throw ArgumentError("k must be at least 1");
  std::vector<std::string> out(report.names.size());
  for (std::size_t i = 0; i < report.names.size(); ++i) out[static_cast<std::size_t>(report.rank[i] - 1)] = report.names[i];
  if (out.size() > static_cast<std::size_t>(k)) out.resize(static_cast<std::size_t>(k));
  return out;
}

std::string forest_to_json(const RandomForest& forest) {
  using nlohmann::json;
  json doc;
  doc["format"] = kCheckpointFormat;
  doc["version"] = kCheckpointVersion;
  doc["seed"] = forest.seed;
  doc["feature_names"] = forest.feature_names;
  json cfg;
  cfg["n_trees"] = forest.config.n_trees;
  cfg["max_features"] = forest.config.max_features ? json(*forest.config.max_features) : json(nullptr);
  cfg["min_leaf"] = forest.config.min_leaf;
  cfg["max_depth"] = forest.config.max_depth ? json(*forest.config.max_depth) : json(nullptr);
  cfg["bootstrap"] = forest.config.bootstrap;
  doc["config"] = cfg;
  json trees = json::array();
  for (const auto& tree : forest.trees) {
    json t;
    std::vector<int> feature, left, right, count;
    std::vector<double> threshold, fraction, decrease;
    for (const auto& node : tree.nodes) {
      feature.push_back(node.feature);
      threshold.push_back(node.threshold);
      left.push_back(node.left);
      right.push_back(node.right);
      fraction.push_back(node.positive_fraction);
      count.push_back(node.sample_count);
      decrease.push_back(node.weighted_decrease);
    }
    t["feature"] = feature;
    t["threshold"] = threshold;
    t["left"] = left;
    t["right"] = right;
    t["positive_fraction"] = fraction;
    t["sample_count"] = count;
    t["weighted_decrease"] = decrease;
    trees.push_back(std::move(t));
  }
  doc["trees"] = std::move(trees);
  return doc.dump();
}

RandomForest forest_from_json(const std::string& text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("forest checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format") != kCheckpointFormat) throw DataError("not a forest checkpoint");
    if (doc.at("version").get<int>() != kCheckpointVersion) {
      throw DataError("unsupported forest checkpoint version " + doc.at("version").dump());
    }
    RandomForest forest;
    forest.seed = doc.at("seed").get<std::uint64_t>();
    forest.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    const auto& cfg = doc.at("config");
    forest.config.n_trees = cfg.at("n_trees").get<int>();
    if (!cfg.at("max_features").is_null()) forest.config.max_features = cfg.at("max_features").get<int>();
    forest.config.min_leaf = cfg.at("min_leaf").get<int>();
    if (!cfg.at("max_depth").is_null()) forest.config.max_depth = cfg.at("max_depth").get<int>();
    forest.config.bootstrap = cfg.at("bootstrap").get<bool>();
    const int p = forest.feature_count();
    for (const auto& t : doc.at("trees")) {
      const auto feature = t.at("feature").get<std::vector<int>>();
      const auto threshold = t.at("threshold").get<std::vector<double>>();
      const auto left = t.at("left").get<std::vector<int>>();
      const auto right = t.at("right").get<std::vector<int>>();
      const auto fraction = t.at("positive_fraction").get<std::vector<double>>();
      const auto count = t.at("sample_count").get<std::vector<int>>();
      const auto decrease = t.at("weighted_decrease").get<std::vector<double>>();
      const std::size_t m = feature.size();
      if (m == 0 || threshold.size() != m || left.size() != m || right.size() != m || fraction.size() != m ||
          count.size() != m || decrease.size() != m) {
        throw DataError("forest checkpoint has inconsistent node arrays");
      }
      DecisionTree tree;
      for (std::size_t i = 0; i < m; ++i) {
        TreeNode node{feature[i], threshold[i], left[i], right[i], fraction[i], count[i], decrease[i]};
        if (!node.is_leaf()) {
          const auto valid_child = [&](int c) { return c > static_cast<int>(i) && c < static_cast<int>(m); };
          if (node.feature >= p || !valid_child(node.left) || !valid_child(node.right)) {
            throw DataError("forest checkpoint node " + std::to_string(i) + " is malformed");
          }
        }
        if (node.positive_fraction < 0 || node.positive_fraction > 1) {
          throw DataError("forest checkpoint leaf fraction outside [0, 1]");
        }
        tree.nodes.push_back(node);
      }
      forest.trees.push_back(std::move(tree));
    }
    if (forest.trees.empty()) throw DataError("forest checkpoint has no trees");
    return forest;
  } catch (const json::exception& e) {
    throw DataError(std::string("forest checkpoint is malformed: ") + e.what());
  }
}

void save_forest(const RandomForest& forest, const std::filesystem::path& path) {
  io::write_file_atomic(path, forest_to_json(forest));
}

RandomForest load_forest(const std::filesystem::path& path) { return forest_from_json(io::read_file(path)); }

}  // namespace molforge::forest
