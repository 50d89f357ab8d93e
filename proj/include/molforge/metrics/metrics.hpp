#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace molforge::metrics {

enum class AnswerFormat : std::uint8_t { yn, cot };

std::string_view to_string(AnswerFormat format);
AnswerFormat answer_format_from_string(std::string_view text);

// yn: the leading token, case-insensitive, trailing punctuation ignored,
// must be "yes" or "no" (returned lower-case). cot: the content of the last
// <answer>...</answer> pair, trimmed and matched case-insensitively against
// the vocabulary (returned as spelled in the vocabulary). nullopt means
// unparseable.
std::optional<std::string> parse_final_answer(std::string_view text, AnswerFormat format,
                                              std::span<const std::string> label_vocab = {});

struct RolloutSet {
  std::string molecule;
  std::vector<std::string> generations;
  AnswerFormat format = AnswerFormat::yn;
  std::string positive_label = "yes";
  std::vector<std::string> label_vocab;
};

struct ScoredMolecule {
  std::string molecule;
  std::optional<double> score;  // nullopt = excluded (no parseable generation)
  int n_parseable = 0;
  int n_positive = 0;

  bool excluded() const { return !score.has_value(); }
};

// score = positives / parseable. Throws ArgumentError on an empty set.
ScoredMolecule rollout_score(const RolloutSet& set);

// Rank statistic: chance a random positive outranks a random negative, ties
// counting one half. Labels are 0/1. Throws ArgumentError unless both classes
// are present or when lengths differ.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

// Average precision with step interpolation; equal scores form one block
// whose precision is taken after the whole block. Throws without positives.
double pr_auc(std::span<const double> scores, std::span<const int> labels);

// Average ranks, ties sharing the mean rank.
std::vector<double> average_ranks(std::span<const double> values);

// Pearson correlation of average ranks; nullopt when either side is constant.
// Throws on length mismatch or fewer than 3 values.
std::optional<double> spearman(std::span<const double> a, std::span<const double> b);

// Squared Pearson correlation. Throws on length mismatch, fewer than 2
// values or constant input.
double pearson_r2(std::span<const double> a, std::span<const double> b);

double mae(std::span<const double> predicted, std::span<const double> actual);
double accuracy(std::span<const int> predicted, std::span<const int> actual);

struct PrecisionRecall {
  std::optional<double> precision;  // nullopt without predicted positives
  std::optional<double> recall;     // nullopt without actual positives
};
PrecisionRecall precision_recall(std::span<const int> predicted, std::span<const int> actual);

enum class Metric : std::uint8_t { roc_auc, pr_auc, accuracy, spearman, mae, r2 };

std::string_view to_string(Metric metric);
Metric metric_from_string(std::string_view text);
bool is_classification(Metric metric);

struct TaskMetricSpec {
  std::string task;
  Metric metric = Metric::roc_auc;
  std::string positive_label = "yes";
};

struct TaskEvaluation {
  Metric metric = Metric::roc_auc;
  std::optional<double> value;  // nullopt when the statistic is undefined
  int n_scored = 0;
  int n_excluded = 0;
  int n_unlabeled = 0;
  std::vector<std::string> excluded_molecules;
};

// Joins scores to ground truth by molecule key, drops excluded and unlabeled
// molecules, then computes the spec's metric. Accuracy thresholds scores at
// 0.5. Throws ArgumentError when nothing remains after the join.
TaskEvaluation evaluate_task(std::span<const ScoredMolecule> scored, const std::map<std::string, double>& truth,
                             const TaskMetricSpec& spec);

}  // namespace molforge::metrics
