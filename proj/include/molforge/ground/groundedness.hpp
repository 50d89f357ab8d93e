#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace molforge::ground {

enum class Provenance : std::uint8_t { external, builtin };
enum class FeatureKind : std::uint8_t { boolean, numerical };

std::string_view to_string(Provenance provenance);
std::string_view to_string(FeatureKind kind);

struct Mention {
  std::string cot_id;
  std::string smiles;
  std::string feature;
  std::optional<double> value;
  Provenance provenance = Provenance::builtin;

  bool operator==(const Mention&) const = default;
};

struct FeatureClassification {
  std::string feature;
  FeatureKind kind = FeatureKind::numerical;
  double boolean_fraction = 0;  // share of values exactly 0 or 1
};

// Boolean iff at least 90% of the values are exactly 0 or 1. Throws
// ArgumentError on empty input.
FeatureClassification classify_feature(std::string feature, std::span<const double> values);

// (low + high) / 2; throws ArgumentError when low > high.
double range_to_midpoint(double low, double high);

struct LexiconEntry {
  std::string feature;
  bool boolean = false;  // presence/absence phrasing maps to 1/0
  std::vector<std::string> synonyms;
};

class Lexicon {
 public:
  // Tab-separated: feature, "numerical" or "boolean", '|'-separated synonyms.
  // Lines starting with '#' are comments.
  static Lexicon parse(std::string_view text);
  static Lexicon load(const std::filesystem::path& path);
  static const Lexicon& builtin();

  const std::vector<LexiconEntry>& entries() const { return entries_; }
  const LexiconEntry* find(std::string_view feature) const;
  // Entries whose feature is listed; throws ArgumentError on unknown names.
  Lexicon restricted(std::span<const std::string> features) const;

 private:
  std::vector<LexiconEntry> entries_;
};

// Finds lexicon synonyms (longest match wins where they overlap) and reads a
// value from the words that follow: a number, a range mapped to its midpoint
// ("between a and b", "a-b", "a to b") or, before the synonym, a count or
// negation ("no donors" gives 0). Boolean features give 0 under negation and
// 1 otherwise. The first non-null value per feature is kept; every lexicon
// feature gets exactly one record, null when nothing was found.
std::vector<Mention> extract_mentions(const std::string& cot_id, const std::string& smiles, std::string_view text,
                                      const Lexicon& lexicon);

struct FeatureReport {
  std::string feature;
  std::optional<FeatureKind> kind;  // nullopt when never mentioned
  double boolean_fraction = 0;
  double occurrence = 0;            // CoTs with a non-null value / total CoTs
  int n = 0;                        // non-null mentions scored
  std::optional<double> spearman;   // numerical features
  std::optional<double> mae;        // numerical features
  std::optional<double> precision;  // boolean features
  std::optional<double> recall;     // boolean features
  bool suppressed = false;          // n < 3: no statistic is reported
};

struct GroundednessReport {
  int total_cots = 0;
  std::vector<FeatureReport> features;  // in the order of the target set
};

inline constexpr int kMinReportedCount = 3;

// ground_truth maps canonical SMILES to descriptor values. Mentions outside
// the target set are ignored, repeated (cot, feature) pairs keep the first
// non-null value, and boolean truth is value > 0. Throws DataError when a
// mentioned molecule has no ground truth and ArgumentError when total_cots is
// smaller than the number of distinct CoTs.
GroundednessReport audit(std::span<const Mention> mentions, std::span<const std::string> features,
                         const std::map<std::string, std::map<std::string, double>>& ground_truth, int total_cots);

// Descriptor values for each SMILES, keyed by canonical SMILES.
std::map<std::string, std::map<std::string, double>> compute_ground_truth(std::span<const std::string> smiles,
                                                                          std::span<const std::string> features,
                                                                          std::size_t threads = 1);

// Columns: feature, kind, occurrence, n, spearman, mae, precision, recall,
// suppressed. Empty cells for undefined values.
std::string report_csv(const GroundednessReport& report);
// Inverse of report_csv up to its printed precision; total_cots is left at 0.
// Throws DataError naming the line on malformed input.
GroundednessReport parse_report_csv(std::string_view text);

enum class HeatmapMetric : std::uint8_t { occurrence, correctness };

struct HeatmapOptions {
  HeatmapMetric metric = HeatmapMetric::occurrence;
  bool log_scale = false;  // occurrence only; floor at 1e-3
  std::string title;
};

// One row per labelled report, one column per feature of the first report.
// Correctness is Spearman for numerical and precision for boolean features.
// Suppressed or undefined cells are drawn in neutral gray without a value.
std::string render_heatmap_svg(const std::vector<std::pair<std::string, GroundednessReport>>& rows,
                               const HeatmapOptions& options);

// JSONL with fields cot_id, smiles, feature, value (number or null).
std::vector<Mention> parse_mentions_jsonl(std::string_view text, Provenance provenance = Provenance::external);
std::string mentions_to_jsonl(std::span<const Mention> mentions);

}  // namespace molforge::ground
