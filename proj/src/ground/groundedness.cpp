#include "molforge/ground/groundedness.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <set>

#include "molforge/chem/smiles.hpp"
#include "molforge/common/error.hpp"
#include "molforge/common/io.hpp"
#include "molforge/common/parallel.hpp"
#include "molforge/data/embedded.hpp"
#include "molforge/desc/descriptors.hpp"
#include "molforge/metrics/metrics.hpp"

namespace molforge::ground {
namespace {

using nlohmann::json;

constexpr int kMaxSkippedWords = 4;
constexpr int kPreWindowWords = 3;

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

// Lowercase, with hyphens between letters turned into spaces; length is kept.
std::string normalize(std::string_view text) {
  std::string out = io::to_lower(text);
  for (std::size_t i = 1; i + 1 < out.size(); ++i) {
    if (out[i] == '-' && is_alpha(out[i - 1]) && is_alpha(out[i + 1])) out[i] = ' ';
  }
  return out;
}

struct Match {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t entry = 0;
};

std::vector<Match> find_matches(const std::string& text, const Lexicon& lexicon) {
  std::vector<Match> all;
  const auto& entries = lexicon.entries();
  for (std::size_t e = 0; e < entries.size(); ++e) {
    for (const auto& raw : entries[e].synonyms) {
      const auto synonym = normalize(raw);
      for (std::size_t pos = text.find(synonym); pos != std::string::npos; pos = text.find(synonym, pos + 1)) {
        if (pos > 0 && is_word_char(text[pos - 1])) continue;
        std::size_t end = pos + synonym.size();
        if (text.compare(end, 2, "es") == 0 && (end + 2 == text.size() || !is_word_char(text[end + 2]))) {
          end += 2;
        } else if (end < text.size() && text[end] == 's') {
          end += 1;
        }
        if (end < text.size() && is_word_char(text[end])) continue;
        all.push_back({pos, end, e});
      }
    }
  }
  std::sort(all.begin(), all.end(), [](const Match& a, const Match& b) {
    if (a.begin != b.begin) return a.begin < b.begin;
    if (a.end != b.end) return a.end > b.end;
    return a.entry < b.entry;
  });
  std::vector<Match> kept;
  for (const auto& m : all) {
    if (!kept.empty() && m.begin < kept.back().end) continue;
    kept.push_back(m);
  }
  return kept;
}

enum class TokenKind : std::uint8_t { number, word, separator, terminator, other };

struct Token {
  TokenKind kind = TokenKind::other;
  double number = 0;
  std::string word;
};

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto starts_number = [&](std::size_t at) {
    return at < text.size() && (std::isdigit(static_cast<unsigned char>(text[at])) != 0 ||
                                (text[at] == '.' && at + 1 < text.size() &&
                                 std::isdigit(static_cast<unsigned char>(text[at + 1])) != 0));
  };
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c)) != 0 && c != '\n') {
      ++i;
      continue;
    }
    const bool negative =
        c == '-' && starts_number(i + 1) && (out.empty() || out.back().kind != TokenKind::number);
    if (starts_number(i) || negative) {
      std::size_t end = negative ? i + 1 : i;
      while (end < text.size() && (std::isdigit(static_cast<unsigned char>(text[end])) != 0 || text[end] == '.')) {
        ++end;
      }
      while (end > i && text[end - 1] == '.') --end;  // a sentence-ending period
      Token token{TokenKind::number, 0, {}};
      std::from_chars(text.data() + i, text.data() + end, token.number);
      out.push_back(token);
      i = end;
    } else if (is_word_char(c)) {
      std::size_t end = i;
      while (end < text.size() && is_word_char(text[end])) ++end;
      out.push_back({TokenKind::word, 0, std::string(text.substr(i, end - i))});
      i = end;
    } else if (c == '-') {
      out.push_back({TokenKind::separator, 0, {}});
      ++i;
    } else if (c == '.' || c == ';' || c == '!' || c == '?' || c == '\n') {
      out.push_back({TokenKind::terminator, 0, {}});
      ++i;
    } else if (text.compare(i, 3, "\xE2\x80\x93") == 0 || text.compare(i, 3, "\xE2\x80\x94") == 0) {
      out.push_back({TokenKind::separator, 0, {}});  // en and em dash
      i += 3;
    } else {
      out.push_back({TokenKind::other, 0, {}});
      ++i;
    }
  }
  return out;
}

std::optional<double> number_word(std::string_view word) {
  static const std::map<std::string_view, double> kWords = {
      {"zero", 0}, {"one", 1},  {"single", 1}, {"two", 2},    {"three", 3},  {"four", 4},  {"five", 5},
      {"six", 6},  {"seven", 7}, {"eight", 8},  {"nine", 9},   {"ten", 10},   {"eleven", 11}, {"twelve", 12}};
  const auto it = kWords.find(word);
  if (it == kWords.end()) return std::nullopt;
  return it->second;
}

bool is_stop_word(std::string_view word) {
  static const std::set<std::string_view> kStop = {"and",  "but",   "while", "whereas", "although",
                                                   "however", "with", "which", "that",    "whose"};
  return kStop.count(word) > 0;
}

bool is_negation(std::string_view word) {
  static const std::set<std::string_view> kNegation = {"no",      "not",     "without", "lacks", "lack",
                                                       "lacking", "absence", "zero",    "devoid", "none"};
  return kNegation.count(word) > 0;
}

struct ReadValue {
  std::optional<double> value;
  bool absent = false;  // "absent", "none", "not present"
};

// Value stated after a synonym.
ReadValue read_after(const std::vector<Token>& tokens, bool numeric) {
  int skipped = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& token = tokens[i];
    if (token.kind == TokenKind::terminator) break;
    if (token.kind == TokenKind::number) {
      if (i + 2 < tokens.size() && tokens[i + 2].kind == TokenKind::number &&
          (tokens[i + 1].kind == TokenKind::separator ||
           (tokens[i + 1].kind == TokenKind::word && tokens[i + 1].word == "to")) &&
          token.number <= tokens[i + 2].number) {
        return {range_to_midpoint(token.number, tokens[i + 2].number)};
      }
      return {token.number};
    }
    if (token.kind != TokenKind::word) continue;
    if (token.word == "between" && i + 3 < tokens.size() && tokens[i + 1].kind == TokenKind::number &&
        tokens[i + 2].kind == TokenKind::word && tokens[i + 2].word == "and" &&
        tokens[i + 3].kind == TokenKind::number && tokens[i + 1].number <= tokens[i + 3].number) {
      return {range_to_midpoint(tokens[i + 1].number, tokens[i + 3].number)};
    }
    if (token.word == "absent" || token.word == "none" ||
        (token.word == "not" && i + 1 < tokens.size() && tokens[i + 1].word == "present")) {
      return {std::nullopt, true};
    }
    if (numeric) {
      if (const auto value = number_word(token.word)) return {value};
    }
    if (is_stop_word(token.word) || ++skipped > kMaxSkippedWords) break;
  }
  return {};
}

// Count or negation stated just before a synonym.
ReadValue read_before(const std::vector<Token>& tokens) {
  std::size_t index = tokens.size();
  while (index > 0 && tokens[index - 1].kind == TokenKind::word &&
         (tokens[index - 1].word == "a" || tokens[index - 1].word == "an" || tokens[index - 1].word == "the")) {
    --index;
  }
  if (index > 0 && tokens[index - 1].kind == TokenKind::number) return {tokens[index - 1].number};
  if (index > 0 && tokens[index - 1].kind == TokenKind::word) {
    if (const auto value = number_word(tokens[index - 1].word)) return {value};
  }
  int words = 0;
  for (std::size_t i = tokens.size(); i > 0 && words < kPreWindowWords; --i) {
    const auto& token = tokens[i - 1];
    if (token.kind == TokenKind::terminator) break;
    if (token.kind != TokenKind::word) continue;
    ++words;
    if (is_negation(token.word)) return {std::nullopt, true};
  }
  return {};
}

std::string format_number(std::optional<double> value) {
  if (!value) return "";
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.6g", *value == 0.0 ? 0.0 : *value);
  return buffer;
}

std::string xml_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// White to dark blue.
std::string ramp_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const auto mix = [t](int from, int to) { return static_cast<int>(std::lround(from + (to - from) * t)); };
  char buffer[8];
  std::snprintf(buffer, sizeof buffer, "#%02x%02x%02x", mix(0xf7, 0x08), mix(0xfb, 0x30), mix(0xff, 0x6b));
  return buffer;
}

}  // namespace

std::string_view to_string(Provenance provenance) {
  return provenance == Provenance::external ? "external" : "builtin";
}

std::string_view to_string(FeatureKind kind) { return kind == FeatureKind::boolean ? "boolean" : "numerical"; }

FeatureClassification classify_feature(std::string feature, std::span<const double> values) {
  if (values.empty()) throw ArgumentError("cannot classify feature '" + feature + "' without values");
  const auto binary = std::count_if(values.begin(), values.end(), [](double v) { return v == 0.0 || v == 1.0; });
  FeatureClassification out;
  out.feature = std::move(feature);
  out.boolean_fraction = static_cast<double>(binary) / static_cast<double>(values.size());
  // Integer comparison keeps the 90% boundary exact.
  out.kind = binary * 10 >= static_cast<std::ptrdiff_t>(values.size()) * 9 ? FeatureKind::boolean
                                                                            : FeatureKind::numerical;
  return out;
}

double range_to_midpoint(double low, double high) {
  if (!(low <= high)) throw ArgumentError("range low end exceeds high end");
  return (low + high) / 2.0;
}

Lexicon Lexicon::parse(std::string_view text) {
  Lexicon lexicon;
  std::set<std::string> seen;
  const auto lines = io::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = io::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto where = "lexicon line " + std::to_string(i + 1) + ": ";
    const auto fields = io::split(line, '\t');
    if (fields.size() != 3) throw DataError(where + "expected 3 tab-separated fields");
    LexiconEntry entry;
    entry.feature = std::string(io::trim(fields[0]));
    const auto mode = io::to_lower(io::trim(fields[1]));
    if (mode != "numerical" && mode != "boolean") throw DataError(where + "mode must be numerical or boolean");
    entry.boolean = mode == "boolean";
    for (const auto& synonym : io::split(fields[2], '|')) {
      const auto trimmed = io::trim(synonym);
      if (!trimmed.empty()) entry.synonyms.emplace_back(trimmed);
    }
    if (entry.feature.empty() || entry.synonyms.empty()) throw DataError(where + "feature and synonyms are required");
    if (!seen.insert(entry.feature).second) throw DataError(where + "duplicate feature " + entry.feature);
    lexicon.entries_.push_back(std::move(entry));
  }
  if (lexicon.entries_.empty()) throw DataError("lexicon has no entries");
  return lexicon;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  try {
    return parse(io::read_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

const Lexicon& Lexicon::builtin() {
  static const Lexicon lexicon = parse(data::embedded("lexicon.tsv"));
  return lexicon;
}

const LexiconEntry* Lexicon::find(std::string_view feature) const {
  for (const auto& entry : entries_) {
    if (entry.feature == feature) return &entry;
  }
  return nullptr;
}

Lexicon Lexicon::restricted(std::span<const std::string> features) const {
  Lexicon out;
  for (const auto& feature : features) {
    const auto* entry = find(feature);
    if (entry == nullptr) throw ArgumentError("feature '" + feature + "' is not in the lexicon");
    out.entries_.push_back(*entry);
  }
  return out;
}

std::vector<Mention> extract_mentions(const std::string& cot_id, const std::string& smiles, std::string_view text,
                                      const Lexicon& lexicon) {
  const auto normalized = normalize(text);
  const auto matches = find_matches(normalized, lexicon);
  const auto& entries = lexicon.entries();
  std::vector<std::optional<double>> values(entries.size());
  for (std::size_t m = 0; m < matches.size(); ++m) {
    const auto& match = matches[m];
    auto& slot = values[match.entry];
    if (slot) continue;
    const bool boolean = entries[match.entry].boolean;
    const std::size_t before_begin = m == 0 ? 0 : matches[m - 1].end;
    const std::size_t after_end = m + 1 < matches.size() ? matches[m + 1].begin : normalized.size();
    const auto before = read_before(tokenize(std::string_view(normalized).substr(before_begin, match.begin - before_begin)));
    const auto after = read_after(tokenize(std::string_view(normalized).substr(match.end, after_end - match.end)), !boolean);
    if (boolean) {
      const bool absent = before.absent || after.absent || (before.value && *before.value == 0.0);
      slot = absent ? 0.0 : 1.0;
    } else if (before.value) {
      slot = before.value;
    } else if (after.value) {
      slot = after.value;
    } else if (before.absent || after.absent) {
      slot = 0.0;
    }
  }
  std::vector<Mention> out;
  out.reserve(entries.size());
  for (std::size_t e = 0; e < entries.size(); ++e) {
    out.push_back({cot_id, smiles, entries[e].feature, values[e], Provenance::builtin});
  }
  return out;
}

GroundednessReport audit(std::span<const Mention> mentions, std::span<const std::string> features,
                         const std::map<std::string, std::map<std::string, double>>& ground_truth, int total_cots) {
  std::set<std::string> cots;
  for (const auto& mention : mentions) cots.insert(mention.cot_id);
  if (total_cots < 1) throw ArgumentError("total CoT count must be positive");
  if (static_cast<std::size_t>(total_cots) < cots.size()) {
    throw ArgumentError("total CoT count " + std::to_string(total_cots) + " is below the " +
                        std::to_string(cots.size()) + " distinct CoTs in the mentions");
  }
  const std::set<std::string> targets(features.begin(), features.end());

  // feature -> cot -> (smiles, value), first non-null value per pair.
  std::map<std::string, std::map<std::string, std::pair<std::string, double>>> chosen;
  for (const auto& mention : mentions) {
    if (!mention.value || targets.count(mention.feature) == 0) continue;
    chosen[mention.feature].try_emplace(mention.cot_id, mention.smiles, *mention.value);
  }

  std::map<std::string, std::string> canonical;
  auto truth_for = [&](const std::string& smiles, const std::string& feature) {
    auto it = canonical.find(smiles);
    if (it == canonical.end()) it = canonical.emplace(smiles, chem::canonical_smiles(smiles)).first;
    const auto molecule = ground_truth.find(it->second);
    if (molecule == ground_truth.end()) throw DataError("no ground truth for molecule " + smiles);
    const auto value = molecule->second.find(feature);
    if (value == molecule->second.end()) {
      throw DataError("no ground-truth value of " + feature + " for molecule " + smiles);
    }
    return value->second;
  };

  GroundednessReport report;
  report.total_cots = total_cots;
  for (const auto& feature : features) {
    FeatureReport row;
    row.feature = feature;
    std::vector<double> stated, actual;
    if (const auto it = chosen.find(feature); it != chosen.end()) {
      for (const auto& [cot, pair] : it->second) {
        stated.push_back(pair.second);
        actual.push_back(truth_for(pair.first, feature));
      }
    }
    row.n = static_cast<int>(stated.size());
    row.occurrence = static_cast<double>(row.n) / static_cast<double>(total_cots);
    if (row.n > 0) {
      const auto classification = classify_feature(feature, stated);
      row.kind = classification.kind;
      row.boolean_fraction = classification.boolean_fraction;
    }
    row.suppressed = row.n < kMinReportedCount;
    if (!row.suppressed) {
      if (row.kind == FeatureKind::numerical) {
        row.spearman = metrics::spearman(stated, actual);
        row.mae = metrics::mae(stated, actual);
      } else {
        std::vector<int> predicted, truth;
        for (std::size_t i = 0; i < stated.size(); ++i) {
          predicted.push_back(stated[i] != 0.0 ? 1 : 0);
          truth.push_back(actual[i] > 0.0 ? 1 : 0);
        }
        const auto pr = metrics::precision_recall(predicted, truth);
        row.precision = pr.precision;
        row.recall = pr.recall;
      }
    }
    report.features.push_back(std::move(row));
  }
  return report;
}

std::map<std::string, std::map<std::string, double>> compute_ground_truth(std::span<const std::string> smiles,
                                                                          std::span<const std::string> features,
                                                                          std::size_t threads) {
  const auto specs = desc::descriptor_specs(features);
  std::vector<std::pair<std::string, std::map<std::string, double>>> rows(smiles.size());
  parallel_for(smiles.size(), threads, [&](std::size_t i) {
    const auto graph = chem::parse_smiles(smiles[i]);
    rows[i] = {chem::write_smiles(graph), desc::compute_descriptors(graph, specs).values};
  });
  return {rows.begin(), rows.end()};
}

std::string report_csv(const GroundednessReport& report) {
  std::string out = "feature,kind,occurrence,n,spearman,mae,precision,recall,suppressed\n";
  for (const auto& row : report.features) {
    out += row.feature + ",";
    out += row.kind ? std::string(to_string(*row.kind)) : "";
    out += "," + format_number(row.occurrence) + "," + std::to_string(row.n) + ",";
    out += format_number(row.spearman) + "," + format_number(row.mae) + ",";
    out += format_number(row.precision) + "," + format_number(row.recall) + ",";
    out += row.suppressed ? "true\n" : "false\n";
  }
  return out;
}

GroundednessReport parse_report_csv(std::string_view text) {
  const auto lines = io::split_lines(text);
  constexpr std::string_view kHeader = "feature,kind,occurrence,n,spearman,mae,precision,recall,suppressed";
  if (lines.empty() || io::trim(lines.front()) != kHeader) {
    throw DataError("report CSV: line 1: expected header '" + std::string(kHeader) + "'");
  }
  GroundednessReport report;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (io::trim(lines[i]).empty()) continue;
    const auto where = "report CSV: line " + std::to_string(i + 1) + ": ";
    const auto cells = io::split(lines[i], ',');
    if (cells.size() != 9) throw DataError(where + "expected 9 columns, got " + std::to_string(cells.size()));
    const auto number = [&](const std::string& cell) -> std::optional<double> {
      if (cell.empty()) return std::nullopt;
      double value = 0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) throw DataError(where + "bad number '" + cell + "'");
      return value;
    };
    FeatureReport row;
    row.feature = cells[0];
    if (cells[1] == "boolean") {
      row.kind = FeatureKind::boolean;
    } else if (cells[1] == "numerical") {
      row.kind = FeatureKind::numerical;
    } else if (!cells[1].empty()) {
      throw DataError(where + "bad kind '" + cells[1] + "'");
    }
    row.occurrence = number(cells[2]).value_or(0);
    row.n = static_cast<int>(number(cells[3]).value_or(0));
    row.spearman = number(cells[4]);
    row.mae = number(cells[5]);
    row.precision = number(cells[6]);
    row.recall = number(cells[7]);
    if (cells[8] != "true" && cells[8] != "false") throw DataError(where + "bad suppressed flag '" + cells[8] + "'");
    row.suppressed = cells[8] == "true";
    report.features.push_back(std::move(row));
  }
  return report;
}

std::string render_heatmap_svg(const std::vector<std::pair<std::string, GroundednessReport>>& rows,
                               const HeatmapOptions& options) {
  constexpr int kCellWidth = 72, kCellHeight = 28, kLeft = 180, kTop = 150, kLegend = 40;
  constexpr const char* kNeutral = "#c8c8c8";
  std::vector<std::string> columns;
  if (!rows.empty()) {
    for (const auto& feature : rows.front().second.features) columns.push_back(feature.feature);
  }
  const int width = kLeft + kCellWidth * static_cast<int>(columns.size()) + 20;
  const int height = kTop + kCellHeight * static_cast<int>(rows.size()) + kLegend;
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
                    std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  if (!options.title.empty()) {
    svg += "<text x=\"10\" y=\"20\" font-size=\"14\">" + xml_escape(options.title) + "</text>\n";
  }
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const int x = kLeft + kCellWidth * static_cast<int>(c) + kCellWidth / 2;
    svg += "<text transform=\"translate(" + std::to_string(x) + "," + std::to_string(kTop - 6) +
           ") rotate(-60)\">" + xml_escape(columns[c]) + "</text>\n";
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const int y = kTop + kCellHeight * static_cast<int>(r);
    svg += "<text x=\"" + std::to_string(kLeft - 6) + "\" y=\"" + std::to_string(y + kCellHeight / 2 + 4) +
           "\" text-anchor=\"end\">" + xml_escape(rows[r].first) + "</text>\n";
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const auto& features = rows[r].second.features;
      const auto found = std::find_if(features.begin(), features.end(),
                                      [&](const FeatureReport& f) { return f.feature == columns[c]; });
      std::optional<double> value;
      if (found != features.end()) {
        if (options.metric == HeatmapMetric::occurrence) {
          value = found->occurrence;
        } else if (!found->suppressed) {
          value = found->kind == FeatureKind::boolean ? found->precision : found->spearman;
        }
      }
      double shade = 0;
      if (value) {
        shade = *value;
        if (options.metric == HeatmapMetric::occurrence && options.log_scale) {
          shade = (std::log10(std::max(*value, 1e-3)) + 3.0) / 3.0;
        }
      }
      const int x = kLeft + kCellWidth * static_cast<int>(c);
      svg += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) + "\" width=\"" +
             std::to_string(kCellWidth) + "\" height=\"" + std::to_string(kCellHeight) + "\" fill=\"" +
             (value ? ramp_color(shade) : std::string(kNeutral)) + "\" stroke=\"#ffffff\"/>\n";
      if (value) {
        char text[32];
        std::snprintf(text, sizeof text, "%.2f", *value);
        svg += "<text x=\"" + std::to_string(x + kCellWidth / 2) + "\" y=\"" + std::to_string(y + kCellHeight / 2 + 4) +
               "\" text-anchor=\"middle\" fill=\"" + (shade > 0.55 ? "#ffffff" : "#000000") + "\">" + text +
               "</text>\n";
      }
    }
  }
  const int legend_y = kTop + kCellHeight * static_cast<int>(rows.size()) + 12;
  svg += "<rect x=\"" + std::to_string(kLeft) + "\" y=\"" + std::to_string(legend_y) +
         "\" width=\"14\" height=\"14\" fill=\"" + kNeutral + "\"/>\n";
  svg += "<text x=\"" + std::to_string(kLeft + 20) + "\" y=\"" + std::to_string(legend_y + 11) + "\">n &lt; " +
         std::to_string(kMinReportedCount) + " (not reported)" +
         (options.metric == HeatmapMetric::occurrence && options.log_scale ? "; log color scale" : "") + "</text>\n";
  svg += "</svg>\n";
  return svg;
}

std::vector<Mention> parse_mentions_jsonl(std::string_view text, Provenance provenance) {
  std::vector<Mention> out;
  const auto lines = io::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (io::trim(lines[i]).empty()) continue;
    const auto where = "line " + std::to_string(i + 1) + ": ";
    try {
      const auto doc = json::parse(lines[i]);
      Mention mention;
      mention.cot_id = doc.at("cot_id").get<std::string>();
      mention.smiles = doc.at("smiles").get<std::string>();
      mention.feature = doc.at("feature").get<std::string>();
      const auto& value = doc.at("value");
      if (!value.is_null()) {
        mention.value = value.get<double>();
        if (!std::isfinite(*mention.value)) throw DataError(where + "non-finite value");
      }
      mention.provenance = provenance;
      out.push_back(std::move(mention));
    } catch (const json::exception& e) {
      throw DataError(where + e.what());
    }
  }
  return out;
}

std::string mentions_to_jsonl(std::span<const Mention> mentions) {
  std::string out;
  for (const auto& mention : mentions) {
    json doc;
    doc["cot_id"] = mention.cot_id;
    doc["smiles"] = mention.smiles;
    doc["feature"] = mention.feature;
    doc["value"] = mention.value ? json(*mention.value) : json(nullptr);
    out += doc.dump() + "\n";
  }
  return out;
}

}  // namespace molforge::ground
