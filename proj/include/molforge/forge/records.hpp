#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace molforge::forge {

enum class Family : std::uint8_t { substructure_yn, property, smiles_recovery, free_text, downstream_yn, downstream_cot };
enum class Split : std::uint8_t { train, valid, test };
enum class Label : std::uint8_t { positive, negative };

std::string_view to_string(Family family);
std::string_view to_string(Split split);
std::string_view to_string(Label label);
Family family_from_string(std::string_view text);
Split split_from_string(std::string_view text);
Label label_from_string(std::string_view text);

// One supervised example. The prompt holds the <molecule> marker exactly
// once; the molecule itself travels as canonical SMILES plus fingerprint bits.
struct ExampleRecord {
  std::string task_id;
  Family family = Family::substructure_yn;
  std::string prompt;
  std::string smiles;
  std::vector<int> fp_bits;  // sorted, unique
  std::string answer;
  std::optional<Label> label;
  Split split = Split::train;
  std::map<std::string, std::string> meta;

  bool operator==(const ExampleRecord&) const = default;
};

std::string record_to_json(const ExampleRecord& record);
// Throws DataError on a malformed object.
ExampleRecord record_from_json(std::string_view line);

// One object per line, LF-terminated, written atomically.
void export_jsonl(std::span<const ExampleRecord> records, const std::filesystem::path& path);
// Blank lines are skipped; a malformed line throws DataError naming its number.
std::vector<ExampleRecord> import_jsonl(const std::filesystem::path& path);
std::vector<ExampleRecord> parse_jsonl(std::string_view text);

// A molecule with a downstream label, read from CSV.
struct LabeledMolecule {
  std::string smiles;
  double label = 0;
  std::optional<Split> split;
};

// Header row required with columns "smiles" and "label" (any case), plus an
// optional "split" column. Quoted fields are not supported. Throws DataError
// with the line number on bad rows.
std::vector<LabeledMolecule> parse_labeled_csv(std::string_view text);
std::vector<LabeledMolecule> read_labeled_csv(const std::filesystem::path& path);

// Deterministic 80/20 train/test assignment by hash of the SMILES string,
// used when the input carries no split column.
Split hash_split(std::string_view smiles, std::uint64_t seed);

}  // namespace molforge::forge
