#include "molforge/metrics/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "molforge/common/error.hpp"
#include "molforge/common/io.hpp"

namespace molforge::metrics {
namespace {

void require_same_length(std::size_t a, std::size_t b) {
  if (a != b) throw ArgumentError("length mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
}

void require_binary(std::span<const int> labels) {
  for (int y : labels) {
    if (y != 0 && y != 1) throw ArgumentError("labels must be 0 or 1");
  }
}

// Sample Pearson correlation; nullopt when either side has zero variance.
std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  const double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double cov = 0, var_a = 0, var_b = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0 || var_b == 0) return std::nullopt;
  return std::clamp(cov / std::sqrt(var_a * var_b), -1.0, 1.0);
}

}  // namespace

std::string_view to_string(AnswerFormat format) { return format == AnswerFormat::yn ? "yn" : "cot"; }

AnswerFormat answer_format_from_string(std::string_view text) {
  const auto lower = io::to_lower(text);
  if (lower == "yn") return AnswerFormat::yn;
  if (lower == "cot") return AnswerFormat::cot;
  throw ArgumentError("unknown answer format '" + std::string(text) + "' (expected yn or cot)");
}

std::optional<std::string> parse_final_answer(std::string_view text, AnswerFormat format,
                                              std::span<const std::string> label_vocab) {
  if (format == AnswerFormat::yn) {
    const auto trimmed = io::trim(text);
    std::size_t end = 0;
    while (end < trimmed.size() && !std::isspace(static_cast<unsigned char>(trimmed[end]))) ++end;
    auto token = io::to_lower(trimmed.substr(0, end));
    while (!token.empty() && std::ispunct(static_cast<unsigned char>(token.back()))) token.pop_back();
    if (token == "yes" || token == "no") return token;
    return std::nullopt;
  }
  constexpr std::string_view kOpen = "<answer>";
  constexpr std::string_view kClose = "</answer>";
  const auto close = text.rfind(kClose);
  if (close == std::string_view::npos) return std::nullopt;
  const auto open = text.substr(0, close).rfind(kOpen);
  if (open == std::string_view::npos) return std::nullopt;
  const auto content = io::to_lower(io::trim(text.substr(open + kOpen.size(), close - open - kOpen.size())));
  for (const auto& label : label_vocab) {
    if (io::to_lower(io::trim(label)) == content) return label;
  }
  return std::nullopt;
}

ScoredMolecule rollout_score(const RolloutSet& set) {
  if (set.generations.empty()) throw ArgumentError("rollout set for '" + set.molecule + "' has no generations");
  ScoredMolecule out;
  out.molecule = set.molecule;
  const auto positive = io::to_lower(io::trim(set.positive_label));
  for (const auto& text : set.generations) {
    const auto label = parse_final_answer(text, set.format, set.label_vocab);
    if (!label) continue;
    ++out.n_parseable;
    if (io::to_lower(*label) == positive) ++out.n_positive;
  }
  if (out.n_parseable > 0) out.score = static_cast<double>(out.n_positive) / out.n_parseable;
  return out;
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  require_same_length(scores.size(), labels.size());
  require_binary(labels);
  const auto positives = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  const double negatives = static_cast<double>(labels.size()) - positives;
  if (positives == 0 || negatives == 0) throw ArgumentError("ROC AUC needs both classes");
  const auto ranks = average_ranks(scores);
  double rank_sum = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) rank_sum += ranks[i];
  }
  return (rank_sum - positives * (positives + 1) / 2.0) / (positives * negatives);
}

double pr_auc(std::span<const double> scores, std::span<const int> labels) {
  require_same_length(scores.size(), labels.size());
  require_binary(labels);
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  if (positives == 0) throw ArgumentError("PR AUC needs at least one positive");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return scores[x] > scores[y]; });
  double ap = 0;
  long tp = 0;
  long fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    long block_tp = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      block_tp += labels[order[j]];
      ++j;
    }
    tp += block_tp;
    fp += static_cast<long>(j - i) - block_tp;
    if (block_tp > 0) {
      ap += (static_cast<double>(tp) / static_cast<double>(tp + fp)) * (static_cast<double>(block_tp) / positives);
    }
    i = j;
  }
  return ap;
}

std::optional<double> spearman(std::span<const double> a, std::span<const double> b) {
  require_same_length(a.size(), b.size());
  if (a.size() < 3) throw ArgumentError("Spearman correlation needs at least 3 values");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pearson(ra, rb);
}

double pearson_r2(std::span<const double> a, std::span<const double> b) {
  require_same_length(a.size(), b.size());
  if (a.size() < 2) throw ArgumentError("r^2 needs at least 2 values");
  const auto r = pearson(a, b);
  if (!r) throw ArgumentError("r^2 is undefined for constant input");
  return *r * *r;
}

double mae(std::span<const double> predicted, std::span<const double> actual) {
  require_same_length(predicted.size(), actual.size());
  if (predicted.empty()) throw ArgumentError("MAE needs at least one value");
  double total = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) total += std::abs(predicted[i] - actual[i]);
  return total / static_cast<double>(predicted.size());
}

double accuracy(std::span<const int> predicted, std::span<const int> actual) {
  require_same_length(predicted.size(), actual.size());
  if (predicted.empty()) throw ArgumentError("accuracy needs at least one value");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == actual[i];
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

PrecisionRecall precision_recall(std::span<const int> predicted, std::span<const int> actual) {
  require_same_length(predicted.size(), actual.size());
  long tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] && actual[i]) ++tp;
    if (predicted[i] && !actual[i]) ++fp;
    if (!predicted[i] && actual[i]) ++fn;
  }
  PrecisionRecall out;
  if (tp + fp > 0) out.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) out.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return out;
}

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::roc_auc: return "roc_auc";
    case Metric::pr_auc: return "pr_auc";
    case Metric::accuracy: return "accuracy";
    case Metric::spearman: return "spearman";
    case Metric::mae: return "mae";
    case Metric::r2: return "r2";
  }
  return "";
}

Metric metric_from_string(std::string_view text) {
  const auto lower = io::to_lower(io::trim(text));
  for (Metric m : {Metric::roc_auc, Metric::pr_auc, Metric::accuracy, Metric::spearman, Metric::mae, Metric::r2}) {
    if (lower == to_string(m)) return m;
  }
  throw ArgumentError("unknown metric '" + std::string(text) +
                      "' (expected roc_auc, pr_auc, accuracy, spearman, mae or r2)");
}

bool is_classification(Metric metric) {
  return metric == Metric::roc_auc || metric == Metric::pr_auc || metric == Metric::accuracy;
}

TaskEvaluation evaluate_task(std::span<const ScoredMolecule> scored, const std::map<std::string, double>& truth,
                             const TaskMetricSpec& spec) {
  TaskEvaluation out;
  out.metric = spec.metric;
  std::vector<double> scores;
  std::vector<double> actual;
  for (const auto& m : scored) {
    if (m.excluded()) {
      ++out.n_excluded;
      out.excluded_molecules.push_back(m.molecule);
      continue;
    }
    const auto it = truth.find(m.molecule);
    if (it == truth.end()) {
      ++out.n_unlabeled;
      continue;
    }
    scores.push_back(*m.score);
    actual.push_back(it->second);
  }
  out.n_scored = static_cast<int>(scores.size());
  if (scores.empty()) throw ArgumentError("task '" + spec.task + "': no scored molecule has a ground-truth label");

  std::vector<int> labels;
  if (is_classification(spec.metric)) {
    for (double y : actual) {
      if (y != 0 && y != 1) throw ArgumentError("task '" + spec.task + "': classification labels must be 0 or 1");
      labels.push_back(static_cast<int>(y));
    }
  }
  switch (spec.metric) {
    case Metric::roc_auc: out.value = roc_auc(scores, labels); break;
    case Metric::pr_auc: out.value = pr_auc(scores, labels); break;
    case Metric::accuracy: {
      std::vector<int> predicted;
      for (double s : scores) predicted.push_back(s >= 0.5 ? 1 : 0);
      out.value = accuracy(predicted, labels);
      break;
    }
    case Metric::spearman: out.value = spearman(scores, actual); break;
    case Metric::mae: out.value = mae(scores, actual); break;
    case Metric::r2:
      if (scores.size() >= 2) {
        const auto r = pearson(scores, actual);
        if (r) out.value = *r * *r;
      }
      break;
  }
  return out;
}

}  // namespace molforge::metrics
