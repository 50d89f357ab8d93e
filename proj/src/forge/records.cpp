#include "molforge/forge/records.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <json.hpp>

#include "molforge/common/error.hpp"
#include "molforge/common/hash.hpp"
#include "molforge/common/io.hpp"

namespace molforge::forge {
namespace {

using nlohmann::json;

constexpr std::pair<Family, std::string_view> kFamilies[] = {
    {Family::substructure_yn, "substructure_yn"}, {Family::property, "property"},
    {Family::smiles_recovery, "smiles_recovery"}, {Family::free_text, "free_text"},
    {Family::downstream_yn, "downstream_yn"},     {Family::downstream_cot, "downstream_cot"},
};
constexpr std::pair<Split, std::string_view> kSplits[] = {
    {Split::train, "train"}, {Split::valid, "valid"}, {Split::test, "test"}};
constexpr std::pair<Label, std::string_view> kLabels[] = {{Label::positive, "positive"}, {Label::negative, "negative"}};

template <typename Enum, std::size_t N>
std::string_view name_of(const std::pair<Enum, std::string_view> (&table)[N], Enum value) {
  for (const auto& [e, name] : table) {
    if (e == value) return name;
  }
  return "";
}

template <typename Enum, std::size_t N>
Enum value_of(const std::pair<Enum, std::string_view> (&table)[N], std::string_view text, std::string_view what) {
  const auto lower = io::to_lower(io::trim(text));
  std::string known;
  for (const auto& [e, name] : table) {
    if (name == lower) return e;
    known += known.empty() ? "" : ", ";
    known += name;
  }
  throw ArgumentError("unknown " + std::string(what) + " '" + std::string(text) + "' (expected one of " + known + ")");
}

}  // namespace

std::string_view to_string(Family family) { return name_of(kFamilies, family); }
std::string_view to_string(Split split) { return name_of(kSplits, split); }
std::string_view to_string(Label label) { return name_of(kLabels, label); }
Family family_from_string(std::string_view text) { return value_of(kFamilies, text, "record family"); }
Split split_from_string(std::string_view text) { return value_of(kSplits, text, "split"); }
Label label_from_string(std::string_view text) { return value_of(kLabels, text, "label"); }

std::string record_to_json(const ExampleRecord& record) {
  json doc;
  doc["task_id"] = record.task_id;
  doc["family"] = to_string(record.family);
  doc["prompt"] = record.prompt;
  doc["smiles"] = record.smiles;
  doc["fp_bits"] = record.fp_bits;
  doc["answer"] = record.answer;
  doc["label"] = record.label ? json(to_string(*record.label)) : json(nullptr);
  doc["split"] = to_string(record.split);
  doc["meta"] = record.meta;
  return doc.dump();
}

ExampleRecord record_from_json(std::string_view line) {
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid JSON: ") + e.what());
  }
  try {
    ExampleRecord record;
    record.task_id = doc.at("task_id").get<std::string>();
    record.family = family_from_string(doc.at("family").get<std::string>());
    record.prompt = doc.at("prompt").get<std::string>();
    record.smiles = doc.at("smiles").get<std::string>();
    record.fp_bits = doc.at("fp_bits").get<std::vector<int>>();
    record.answer = doc.at("answer").get<std::string>();
    if (!doc.at("label").is_null()) record.label = label_from_string(doc.at("label").get<std::string>());
    record.split = split_from_string(doc.at("split").get<std::string>());
    record.meta = doc.at("meta").get<std::map<std::string, std::string>>();
    if (!std::is_sorted(record.fp_bits.begin(), record.fp_bits.end()) ||
        std::adjacent_find(record.fp_bits.begin(), record.fp_bits.end()) != record.fp_bits.end()) {
      throw DataError("fp_bits must be sorted and unique");
    }
    return record;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed record: ") + e.what());
  } catch (const ArgumentError& e) {
    throw DataError(std::string("malformed record: ") + e.what());
  }
}

void export_jsonl(std::span<const ExampleRecord> records, const std::filesystem::path& path) {
  std::string out;
  for (const auto& record : records) {
    out += record_to_json(record);
    out += '\n';
  }
  io::write_file_atomic(path, out);
}

std::vector<ExampleRecord> parse_jsonl(std::string_view text) {
  std::vector<ExampleRecord> records;
  const auto lines = io::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (io::trim(lines[i]).empty()) continue;
    try {
      records.push_back(record_from_json(lines[i]));
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return records;
}

std::vector<ExampleRecord> import_jsonl(const std::filesystem::path& path) {
  try {
    return parse_jsonl(io::read_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<LabeledMolecule> parse_labeled_csv(std::string_view text) {
  const auto lines = io::split_lines(text);
  std::size_t first = 0;
  while (first < lines.size() && io::trim(lines[first]).empty()) ++first;
  if (first == lines.size()) throw DataError("labeled CSV is empty");
  const auto header = io::split(lines[first], ',');
  int smiles_col = -1, label_col = -1, split_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto name = io::to_lower(io::trim(header[c]));
    if (name == "smiles") smiles_col = static_cast<int>(c);
    if (name == "label") label_col = static_cast<int>(c);
    if (name == "split") split_col = static_cast<int>(c);
  }
  if (smiles_col < 0 || label_col < 0) throw DataError("labeled CSV header needs 'smiles' and 'label' columns");

  std::vector<LabeledMolecule> out;
  for (std::size_t i = first + 1; i < lines.size(); ++i) {
    if (io::trim(lines[i]).empty()) continue;
    const auto fields = io::split(lines[i], ',');
    const auto where = "line " + std::to_string(i + 1) + ": ";
    if (fields.size() != header.size()) {
      throw DataError(where + "expected " + std::to_string(header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    }
    LabeledMolecule row;
    row.smiles = std::string(io::trim(fields[static_cast<std::size_t>(smiles_col)]));
    if (row.smiles.empty()) throw DataError(where + "empty SMILES");
    const auto label_text = io::trim(fields[static_cast<std::size_t>(label_col)]);
    const auto lower = io::to_lower(label_text);
    if (lower == "yes" || lower == "true" || lower == "positive") {
      row.label = 1;
    } else if (lower == "no" || lower == "false" || lower == "negative") {
      row.label = 0;
    } else {
      const auto* end = label_text.data() + label_text.size();
      const auto [ptr, ec] = std::from_chars(label_text.data(), end, row.label);
      if (ec != std::errc() || ptr != end || !std::isfinite(row.label)) {
        throw DataError(where + "label '" + std::string(label_text) + "' is not a number");
      }
    }
    if (split_col >= 0) {
      const auto split_text = io::trim(fields[static_cast<std::size_t>(split_col)]);
      if (!split_text.empty()) {
        try {
          row.split = split_from_string(split_text);
        } catch (const ArgumentError& e) {
          throw DataError(where + e.what());
        }
      }
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<LabeledMolecule> read_labeled_csv(const std::filesystem::path& path) {
  try {
    return parse_labeled_csv(io::read_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

Split hash_split(std::string_view smiles, std::uint64_t seed) {
  return hash_string(smiles, seed) % 5 == 0 ? Split::test : Split::train;
}

}  // namespace molforge::forge
