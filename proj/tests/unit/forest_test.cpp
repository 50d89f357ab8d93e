#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "molforge/common/error.hpp"
#include "molforge/common/rng.hpp"
#include "molforge/forest/forest.hpp"

namespace molforge::forest {
namespace {

struct Dataset {
  Eigen::MatrixXd x;
  std::vector<int> y;
};

// Two classes separated by the line x0 + x1 = 0 with a gap of width 1.
Dataset blobs(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset data{Eigen::MatrixXd(static_cast<Eigen::Index>(n), 2), {}};
  std::size_t filled = 0;
  while (filled < n) {
    const double a = rng.uniform(-3, 3);
    const double b = rng.uniform(-3, 3);
    const double signed_distance = (a + b) / std::sqrt(2.0);
    if (std::abs(signed_distance) < 0.5) continue;
    data.x(static_cast<Eigen::Index>(filled), 0) = a;
    data.x(static_cast<Eigen::Index>(filled), 1) = b;
    data.y.push_back(signed_distance > 0 ? 1 : 0);
    ++filled;
  }
  return data;
}

// f0 decides the label, f1 is independent noise.
Dataset signal_and_noise(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset data{Eigen::MatrixXd(static_cast<Eigen::Index>(n), 2), {}};
  for (std::size_t i = 0; i < n; ++i) {
    const double signal = rng.uniform(-1, 1);
    data.x(static_cast<Eigen::Index>(i), 0) = signal;
    data.x(static_cast<Eigen::Index>(i), 1) = rng.uniform(-1, 1);
    data.y.push_back(signal > 0 ? 1 : 0);
  }
  if (std::count(data.y.begin(), data.y.end(), 1) == 0) data.y[0] = 1;
  if (std::count(data.y.begin(), data.y.end(), 0) == 0) data.y[0] = 0;
  return data;
}

ForestConfig small_config(int trees = 50) {
  ForestConfig config;
  config.n_trees = trees;
  return config;
}

std::vector<double> row_of(const Eigen::MatrixXd& x, Eigen::Index r) {
  std::vector<double> row(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index c = 0; c < x.cols(); ++c) row[static_cast<std::size_t>(c)] = x(r, c);
  return row;
}

void expect_well_formed(const RandomForest& forest) {
  for (const auto& tree : forest.trees) {
    ASSERT_FALSE(tree.nodes.empty());
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      const auto& node = tree.nodes[i];
      EXPECT_GE(node.positive_fraction, 0.0);
      EXPECT_LE(node.positive_fraction, 1.0);
      if (node.is_leaf()) continue;
      EXPECT_LT(node.feature, forest.feature_count());
      EXPECT_GT(node.left, static_cast<int>(i));
      EXPECT_GT(node.right, static_cast<int>(i));
      EXPECT_LT(node.left, static_cast<int>(tree.nodes.size()));
      EXPECT_LT(node.right, static_cast<int>(tree.nodes.size()));
    }
  }
}

TEST(Forest, FeatureEqualToLabelGivesPerfectTrainingAccuracy) {
  Eigen::MatrixXd x(6, 1);
  x << 0, 1, 0, 1, 1, 0;
  const std::vector<int> y{0, 1, 0, 1, 1, 0};
  const auto forest = fit_forest(x, y, small_config(), 1);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double p = forest.predict_proba(row_of(x, r));
    EXPECT_EQ(p >= 0.5 ? 1 : 0, y[static_cast<std::size_t>(r)]);
  }
}

TEST(Forest, RejectsDegenerateInput) {
  Eigen::MatrixXd x(3, 1);
  x << 0, 1, 2;
  const std::vector<int> all_positive{1, 1, 1};
  EXPECT_THROW(fit_forest(x, all_positive, small_config(), 1), ArgumentError);

  const std::vector<int> short_labels{0, 1};
  EXPECT_THROW(fit_forest(x, short_labels, small_config(), 1), ArgumentError);

  Eigen::MatrixXd one(1, 1);
  one << 0;
  const std::vector<int> single{1};
  EXPECT_THROW(fit_forest(one, single, small_config(), 1), ArgumentError);

  ForestConfig no_trees;
  no_trees.n_trees = 0;
  const std::vector<int> y{0, 1, 0};
  EXPECT_THROW(fit_forest(x, y, no_trees, 1), ArgumentError);
}

TEST(Forest, NonFiniteValueErrorNamesRowAndColumn) {
  Eigen::MatrixXd x(3, 2);
  x << 0, 1, 2, std::nan(""), 4, 5;
  const std::vector<int> y{0, 1, 0};
  try {
    fit_forest(x, y, small_config(), 1);
    FAIL() << "expected an error";
  } catch (const ArgumentError& e) {
    const std::string message = e.what();
    EXPECT_NE(message.find("row 1"), std::string::npos) << message;
    EXPECT_NE(message.find("column 1"), std::string::npos) << message;
  }
}

TEST(Forest, SeparableBlobsHeldOutAccuracy) {
  const auto train = blobs(200, 11);
  const auto test = blobs(200, 12);
  const auto forest = fit_forest(train.x, train.y, ForestConfig{}, 7);
  expect_well_formed(forest);
  const auto probs = forest.predict_proba(test.x);
  int hits = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) hits += (probs[i] >= 0.5 ? 1 : 0) == test.y[i];
  EXPECT_GE(static_cast<double>(hits) / static_cast<double>(probs.size()), 0.95);
}

TEST(Forest, SeparableRegionsGiveCertainProbabilities) {
  // Large enough that no bootstrap resample is single-class for this seed.
  Eigen::MatrixXd x(40, 1);
  std::vector<int> y;
  for (int i = 0; i < 40; ++i) {
    x(i, 0) = i < 20 ? -1.0 - i : 1.0 + (i - 20);
    y.push_back(i < 20 ? 0 : 1);
  }
  const auto forest = fit_forest(x, y, small_config(), 3);
  EXPECT_EQ(forest.predict_proba(std::vector<double>{10.0}), 1.0);
  EXPECT_EQ(forest.predict_proba(std::vector<double>{-10.0}), 0.0);
}

TEST(Forest, ProbabilitiesStayInUnitInterval) {
  const auto data = signal_and_noise(80, 5);
  const auto forest = fit_forest(data.x, data.y, small_config(), 5);
  Rng rng(99);
  for (int i = 0; i < 500; ++i) {
    const std::vector<double> row{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    const double p = forest.predict_proba(row);
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
  EXPECT_THROW(forest.predict_proba(std::vector<double>{0.0}), ArgumentError);
}

TEST(Forest, PredictiveFeatureOutranksNoise) {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto data = signal_and_noise(100, 1000 + seed);
    const auto forest = fit_forest(data.x, data.y, small_config(), seed, {"f1", "f2"});
    const auto report = gini_importance(forest);
    if (report.importance[0] > report.importance[1]) ++wins;
    EXPECT_NEAR(std::accumulate(report.importance.begin(), report.importance.end(), 0.0), 1.0, 1e-9);
    for (double v : report.importance) EXPECT_GE(v, 0.0);
  }
  EXPECT_GE(wins, 95);
}

TEST(Forest, SingleFeatureImportanceIsOne) {
  Eigen::MatrixXd x(4, 1);
  x << 0, 1, 2, 3;
  const std::vector<int> y{0, 0, 1, 1};
  const auto report = gini_importance(fit_forest(x, y, small_config(), 2));
  ASSERT_EQ(report.importance.size(), 1u);
  EXPECT_DOUBLE_EQ(report.importance[0], 1.0);
  EXPECT_EQ(report.rank[0], 1);
}

TEST(Forest, TopKFeatures) {
  const auto data = signal_and_noise(100, 77);
  const auto report = gini_importance(fit_forest(data.x, data.y, small_config(), 4, {"f1", "f2"}));
  EXPECT_EQ(top_k_features(report, 1), std::vector<std::string>{"f1"});
  EXPECT_EQ(top_k_features(report, 20), (std::vector<std::string>{"f1", "f2"}));
  EXPECT_THROW(top_k_features(report, 0), ArgumentError);

  ImportanceReport tied{{"a", "b", "c"}, {0.25, 0.5, 0.25}, {2, 1, 3}};
  EXPECT_EQ(top_k_features(tied, 3), (std::vector<std::string>{"b", "a", "c"}));
}

TEST(Forest, RanksBreakTiesByFeatureIndex) {
  // No tree can split on anything but the two identical columns.
  Eigen::MatrixXd x(4, 2);
  x << 0, 0, 1, 1, 2, 2, 3, 3;
  const std::vector<int> y{0, 0, 1, 1};
  ForestConfig config = small_config();
  config.max_features = 2;
  const auto report = gini_importance(fit_forest(x, y, config, 6, {"a", "b"}));
  EXPECT_EQ(report.importance[1], 0.0);  // equal decreases go to the lower index
  EXPECT_EQ(report.rank, (std::vector<int>{1, 2}));
}

TEST(Forest, DeterministicForSeedAndThreadCount) {
  const auto data = blobs(120, 21);
  const auto one = fit_forest(data.x, data.y, small_config(), 42, {}, 1);
  const auto four = fit_forest(data.x, data.y, small_config(), 42, {}, 4);
  const auto again = fit_forest(data.x, data.y, small_config(), 42, {}, 1);
  EXPECT_EQ(forest_to_json(one), forest_to_json(four));
  EXPECT_EQ(forest_to_json(one), forest_to_json(again));
  const auto other = fit_forest(data.x, data.y, small_config(), 43, {}, 1);
  EXPECT_NE(forest_to_json(one), forest_to_json(other));
}

TEST(Forest, DuplicatingRowsKeepsPredictionsWithoutBootstrap) {
  const auto data = signal_and_noise(60, 8);
  Eigen::MatrixXd doubled(data.x.rows() * 2, data.x.cols());
  doubled << data.x, data.x;
  std::vector<int> doubled_y = data.y;
  doubled_y.insert(doubled_y.end(), data.y.begin(), data.y.end());
  ForestConfig config = small_config(20);
  config.bootstrap = false;
  const auto base = fit_forest(data.x, data.y, config, 9);
  const auto dup = fit_forest(doubled, doubled_y, config, 9);
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> row{rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2)};
    EXPECT_DOUBLE_EQ(base.predict_proba(row), dup.predict_proba(row));
  }
}

TEST(Forest, ConstantFeatureChangesNothing) {
  const auto data = blobs(100, 31);
  Eigen::MatrixXd padded(data.x.rows(), 3);
  padded.col(0) = data.x.col(0);
  padded.col(1) = Eigen::VectorXd::Constant(data.x.rows(), 7.5);
  padded.col(2) = data.x.col(1);
  const auto base = fit_forest(data.x, data.y, small_config(), 13);
  const auto with_constant = fit_forest(padded, data.y, small_config(), 13);
  Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    const double a = rng.uniform(-3, 3);
    const double b = rng.uniform(-3, 3);
    EXPECT_EQ(base.predict_proba(std::vector<double>{a, b}),
              with_constant.predict_proba(std::vector<double>{a, rng.uniform(-10, 10), b}));
  }
  const auto base_report = gini_importance(base);
  const auto report = gini_importance(with_constant);
  EXPECT_EQ(report.importance[1], 0.0);
  EXPECT_DOUBLE_EQ(report.importance[0], base_report.importance[0]);
  EXPECT_DOUBLE_EQ(report.importance[2], base_report.importance[1]);
}

TEST(Forest, SingleDeepTreeReproducesTrainingLabels) {
  Rng rng(23);
  Eigen::MatrixXd x(150, 4);
  std::vector<int> y;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) = rng.uniform01();
    y.push_back(rng.bernoulli(0.4) ? 1 : 0);
  }
  ForestConfig config;
  config.n_trees = 1;
  config.bootstrap = false;
  const auto forest = fit_forest(x, y, config, 1);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    EXPECT_EQ(forest.predict_proba(row_of(x, r)), static_cast<double>(y[static_cast<std::size_t>(r)]));
  }
}

TEST(Forest, MaxDepthAndMinLeafAreRespected) {
  const auto data = blobs(100, 41);
  ForestConfig config = small_config(10);
  config.max_depth = 2;
  config.min_leaf = 5;
  const auto forest = fit_forest(data.x, data.y, config, 2);
  for (const auto& tree : forest.trees) {
    EXPECT_LE(tree.depth(), 2);
    for (const auto& node : tree.nodes) {
      if (node.is_leaf()) EXPECT_GE(node.sample_count, 5);
    }
  }
}

TEST(Forest, CheckpointRoundTrip) {
  const auto data = blobs(80, 51);
  ForestConfig config = small_config(15);
  config.max_depth = 6;
  const auto forest = fit_forest(data.x, data.y, config, 77, {"alpha", "beta"});
  const auto path = std::filesystem::temp_directory_path() / "molforge_forest_test.json";
  save_forest(forest, path);
  const auto loaded = load_forest(path);
  std::filesystem::remove(path);
  EXPECT_EQ(forest_to_json(loaded), forest_to_json(forest));
  EXPECT_EQ(loaded.feature_names, forest.feature_names);
  EXPECT_EQ(loaded.config.max_depth, 6);
  EXPECT_EQ(loaded.seed, 77u);
  for (Eigen::Index r = 0; r < data.x.rows(); ++r) {
    EXPECT_EQ(loaded.predict_proba(row_of(data.x, r)), forest.predict_proba(row_of(data.x, r)));
  }
  EXPECT_THROW(forest_from_json("{}"), DataError);
  EXPECT_THROW(forest_from_json("not json"), DataError);
}

}  // namespace
}  // namespace molforge::forest
