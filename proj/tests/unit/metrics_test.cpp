#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "molforge/common/error.hpp"
#include "molforge/common/rng.hpp"
#include "molforge/metrics/metrics.hpp"

namespace molforge::metrics {
namespace {

// Exact rational arithmetic for the PR AUC oracle.
struct Fraction {
  long long num = 0;
  long long den = 1;

  static Fraction make(long long n, long long d) {
    const long long g = std::gcd(n, d);
    return {n / g, d / g};
  }
  Fraction operator+(const Fraction& o) const { return make(num * o.den + o.num * den, den * o.den); }
  Fraction operator-(const Fraction& o) const { return make(num * o.den - o.num * den, den * o.den); }
  Fraction operator*(const Fraction& o) const { return make(num * o.num, den * o.den); }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// Step-curve oracle: sweep every distinct threshold from high to low, call
// everything at or above it positive, and add precision times the recall gain.
Fraction average_precision_oracle(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::set<double, std::greater<>> thresholds(scores.begin(), scores.end());
  const long long positives = std::count(labels.begin(), labels.end(), 1);
  Fraction ap;
  Fraction previous_recall;
  for (double t : thresholds) {
    long long tp = 0, called = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= t) {
        ++called;
        tp += labels[i];
      }
    }
    const Fraction recall = Fraction::make(tp, positives);
    if (tp > 0) ap = ap + Fraction::make(tp, called) * (recall - previous_recall);
    previous_recall = recall;
  }
  return ap;
}

// O(n^2) pair counting.
double roc_oracle(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0;
  double pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[i] != 1 || labels[j] != 0) continue;
      pairs += 1;
      wins += scores[i] > scores[j] ? 1.0 : scores[i] == scores[j] ? 0.5 : 0.0;
    }
  }
  return wins / pairs;
}

TEST(ParseFinalAnswer, YesNo) {
  EXPECT_EQ(parse_final_answer("Yes.", AnswerFormat::yn), "yes");
  EXPECT_EQ(parse_final_answer("  no, because", AnswerFormat::yn), "no");
  EXPECT_EQ(parse_final_answer("YES!", AnswerFormat::yn), "yes");
  EXPECT_FALSE(parse_final_answer("Maybe yes.", AnswerFormat::yn));
  EXPECT_FALSE(parse_final_answer("", AnswerFormat::yn));
}

TEST(ParseFinalAnswer, ChainOfThought) {
  const std::vector<std::string> vocab{"pass", "fail"};
  EXPECT_EQ(parse_final_answer("reasoning... <answer>fail</answer>", AnswerFormat::cot, vocab), "fail");
  EXPECT_EQ(parse_final_answer("<answer>pass</answer> then <answer> FAIL </answer>", AnswerFormat::cot, vocab), "fail");
  EXPECT_FALSE(parse_final_answer("<answer>maybe</answer>", AnswerFormat::cot, vocab));
  EXPECT_FALSE(parse_final_answer("<answer>pass", AnswerFormat::cot, vocab));
  EXPECT_FALSE(parse_final_answer("pass", AnswerFormat::cot, vocab));
}

TEST(RolloutScore, FractionOfParseable) {
  RolloutSet set;
  set.molecule = "CCO";
  for (int i = 0; i < 30; ++i) set.generations.push_back("Yes.");
  for (int i = 0; i < 10; ++i) set.generations.push_back("No.");
  for (int i = 0; i < 10; ++i) set.generations.push_back("I cannot tell");
  const auto scored = rollout_score(set);
  EXPECT_EQ(scored.n_parseable, 40);
  EXPECT_EQ(scored.n_positive, 30);
  EXPECT_DOUBLE_EQ(*scored.score, 0.75);

  Rng rng(3);
  for (int k = 0; k < 5; ++k) {
    rng.shuffle(set.generations);
    EXPECT_DOUBLE_EQ(*rollout_score(set).score, 0.75);
  }

  RolloutSet none{"C", {"hmm", "unsure"}, AnswerFormat::yn, "yes", {}};
  EXPECT_TRUE(rollout_score(none).excluded());
  RolloutSet all{"C", {"Yes", "yes."}, AnswerFormat::yn, "yes", {}};
  EXPECT_DOUBLE_EQ(*rollout_score(all).score, 1.0);
  EXPECT_THROW(rollout_score(RolloutSet{}), ArgumentError);

  RolloutSet cot{"C", {"<answer>pass</answer>", "<answer>fail</answer>", "<answer>x</answer>"},
                 AnswerFormat::cot, "pass", {"pass", "fail"}};
  EXPECT_DOUBLE_EQ(*rollout_score(cot).score, 0.5);
}

TEST(RocAuc, Examples) {
  const std::vector<double> s{0.9, 0.8, 0.3};
  const std::vector<int> y{1, 1, 0};
  EXPECT_DOUBLE_EQ(roc_auc(s, y), 1.0);
  const std::vector<double> flat(4, 0.5);
  const std::vector<int> y4{1, 0, 1, 0};
  EXPECT_DOUBLE_EQ(roc_auc(flat, y4), 0.5);
  const std::vector<int> one_class{1, 1, 1};
  EXPECT_THROW(roc_auc(s, one_class), ArgumentError);
}

TEST(RocAuc, MatchesPairCountingOracle) {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> s(12);
    std::vector<int> y(12);
    for (int i = 0; i < 12; ++i) {
      s[static_cast<std::size_t>(i)] = static_cast<double>(rng.uniform_index(6)) / 5.0;  // forces ties
      y[static_cast<std::size_t>(i)] = rng.bernoulli(0.4) ? 1 : 0;
    }
    y[0] = 1;
    y[1] = 0;
    EXPECT_NEAR(roc_auc(s, y), roc_oracle(s, y), 1e-15);
  }
}

TEST(RocAuc, Invariants) {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s(30);
    std::vector<int> y(30);
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = std::round(rng.uniform01() * 10) / 10;
      y[i] = rng.bernoulli(0.5) ? 1 : 0;
    }
    y[0] = 1;
    y[1] = 0;
    std::vector<double> transformed(s.size());
    std::transform(s.begin(), s.end(), transformed.begin(), [](double v) { return std::exp(3 * v) - 7; });
    EXPECT_NEAR(roc_auc(s, y), roc_auc(transformed, y), 1e-12);
    std::vector<int> flipped(y.size());
    std::transform(y.begin(), y.end(), flipped.begin(), [](int v) { return 1 - v; });
    EXPECT_NEAR(roc_auc(s, y) + roc_auc(s, flipped), 1.0, 1e-12);
  }
}

TEST(PrAuc, Examples) {
  const std::vector<double> s{0.9, 0.8, 0.2, 0.1};
  const std::vector<int> y{1, 1, 0, 0};
  EXPECT_DOUBLE_EQ(pr_auc(s, y), 1.0);
  for (int n = 2; n <= 8; ++n) {
    std::vector<double> scores(static_cast<std::size_t>(n));
    std::vector<int> labels(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) scores[static_cast<std::size_t>(i)] = n - i;
    labels.back() = 1;
    EXPECT_NEAR(pr_auc(scores, labels), 1.0 / n, 1e-15);
  }
  const std::vector<int> none{0, 0, 0, 0};
  EXPECT_THROW(pr_auc(s, none), ArgumentError);
}

TEST(PrAuc, AllTiedEqualsPrevalence) {
  const std::vector<double> s(10, 0.3);
  const std::vector<int> y{1, 0, 0, 1, 0, 0, 0, 1, 0, 0};
  EXPECT_NEAR(pr_auc(s, y), 0.3, 1e-15);
}

TEST(PrAuc, MatchesExactStepCurveOracle) {
  Rng rng(10);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> s(10);
    std::vector<int> y(10);
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = static_cast<double>(rng.uniform_index(5));
      y[i] = rng.bernoulli(0.4) ? 1 : 0;
    }
    y[3] = 1;
    EXPECT_NEAR(pr_auc(s, y), average_precision_oracle(s, y).value(), 1e-12);
  }
}

TEST(Spearman, Examples) {
  const std::vector<double> a{1, 2, 3, 4, 5};
  const std::vector<double> rev{5, 4, 3, 2, 1};
  EXPECT_NEAR(*spearman(a, a), 1.0, 1e-15);
  EXPECT_NEAR(*spearman(a, rev), -1.0, 1e-15);
  // Hand calculation: ranks (1, 2.5, 2.5, 4) vs (1, 2, 3, 4); covariance 4.5,
  // variances 4.5 and 5, so rho = sqrt(0.9).
  const std::vector<double> tied{1, 2, 2, 3};
  const std::vector<double> plain{1, 2, 3, 4};
  EXPECT_NEAR(*spearman(tied, plain), std::sqrt(0.9), 1e-15);
  const std::vector<double> constant{2, 2, 2, 2};
  EXPECT_FALSE(spearman(constant, plain).has_value());
  EXPECT_THROW(spearman(std::vector<double>{1, 2}, std::vector<double>{1, 2}), ArgumentError);
  EXPECT_THROW(spearman(a, plain), ArgumentError);
}

TEST(Spearman, MonotoneInvariance) {
  Rng rng(4);
  std::vector<double> a(20), b(20);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = rng.normal(0, 1);
    b[i] = a[i] + rng.normal(0, 1);
  }
  std::vector<double> ta(a.size());
  std::transform(a.begin(), a.end(), ta.begin(), [](double v) { return std::atan(v) * 5 + 1; });
  EXPECT_NEAR(*spearman(a, b), *spearman(ta, b), 1e-12);
}

TEST(PearsonR2, ExamplesAndOracle) {
  const std::vector<double> a{1, 2, 3, 4};
  std::vector<double> affine(a.size()), negated(a.size());
  std::transform(a.begin(), a.end(), affine.begin(), [](double v) { return 2 * v + 3; });
  std::transform(a.begin(), a.end(), negated.begin(), [](double v) { return -v; });
  EXPECT_NEAR(pearson_r2(a, affine), 1.0, 1e-15);
  EXPECT_NEAR(pearson_r2(a, negated), 1.0, 1e-15);
  EXPECT_THROW(pearson_r2(a, std::vector<double>{1, 1, 1, 1}), ArgumentError);

  // Oracle: the raw-sum covariance formula.
  Rng rng(8);
  std::vector<double> x(50), y(50);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.uniform(-3, 3);
    y[i] = 1.7 * x[i] + rng.normal(0, 1.5);
  }
  const double n = 50;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  const double r = (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
  EXPECT_NEAR(pearson_r2(x, y), r * r, 1e-10);
}

TEST(SimpleStatistics, Examples) {
  const std::vector<double> v{1, 2.5, -3};
  EXPECT_EQ(mae(v, v), 0.0);
  EXPECT_NEAR(mae(std::vector<double>{1, 2}, std::vector<double>{2, 4}), 1.5, 1e-15);
  const std::vector<int> labels{1, 0, 1, 1, 0};
  EXPECT_EQ(accuracy(labels, labels), 1.0);
  const auto pr = precision_recall(labels, labels);
  EXPECT_EQ(*pr.precision, 1.0);
  EXPECT_EQ(*pr.recall, 1.0);
  const std::vector<int> none(5, 0);
  const auto empty = precision_recall(none, labels);
  EXPECT_FALSE(empty.precision.has_value());
  EXPECT_EQ(*empty.recall, 0.0);
  EXPECT_THROW(accuracy(labels, std::vector<int>{1}), ArgumentError);
}

TEST(EvaluateTask, JoinsAndReportsCoverage) {
  std::vector<ScoredMolecule> scored = {
      {"a", 0.9, 10, 9}, {"b", 0.2, 10, 2}, {"c", std::nullopt, 0, 0}, {"d", 0.7, 5, 3}, {"e", 0.1, 4, 0}};
  const std::map<std::string, double> truth{{"a", 1}, {"b", 0}, {"c", 1}, {"d", 0}, {"e", 0}};
  const TaskMetricSpec spec{"toy", Metric::roc_auc, "yes"};
  const auto eval = evaluate_task(scored, truth, spec);
  EXPECT_EQ(eval.n_excluded, 1);
  EXPECT_EQ(eval.excluded_molecules, std::vector<std::string>{"c"});
  EXPECT_EQ(eval.n_scored, 4);
  const std::vector<double> s{0.9, 0.2, 0.7, 0.1};
  const std::vector<int> y{1, 0, 0, 0};
  EXPECT_DOUBLE_EQ(*eval.value, roc_auc(s, y));

  std::vector<ScoredMolecule> all_excluded = {{"a", std::nullopt, 0, 0}};
  EXPECT_THROW(evaluate_task(all_excluded, truth, spec), ArgumentError);
  EXPECT_EQ(metric_from_string("PR_AUC"), Metric::pr_auc);
  EXPECT_THROW(metric_from_string("f1"), ArgumentError);
}

}  // namespace
}  // namespace molforge::metrics
