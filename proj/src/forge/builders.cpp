#include "molforge/forge/builders.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "molforge/chem/smiles.hpp"
#include "molforge/common/error.hpp"
#include "molforge/common/hash.hpp"
#include "molforge/common/io.hpp"
#include "molforge/common/parallel.hpp"
#include "molforge/common/rng.hpp"
#include "molforge/fp/fingerprint.hpp"

namespace molforge::forge {
namespace {

void require_corpus(const Corpus& corpus) {
  if (corpus.molecules.empty()) throw ArgumentError("the molecule corpus is empty");
}

const std::string& pick_template(const TemplateSet& set, Rng& rng) {
  return set.templates[static_cast<std::size_t>(rng.uniform_index(set.templates.size()))];
}

ExampleRecord base_record(const std::string& task_id, Family family, const CorpusMolecule& molecule) {
  ExampleRecord record;
  record.task_id = task_id;
  record.family = family;
  record.smiles = molecule.smiles;
  record.fp_bits = molecule.fp_bits;
  return record;
}

std::string with_instruction(std::string question, const std::string& instruction) {
  return question + " " + instruction;
}

std::string full_precision(double value) {
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, end);
}

}  // namespace

Corpus prepare_corpus(std::span<const std::string> smiles, std::size_t threads) {
  std::vector<std::optional<CorpusMolecule>> parsed(smiles.size());
  std::vector<std::string> errors(smiles.size());
  parallel_for(smiles.size(), threads, [&](std::size_t i) {
    auto result = chem::try_parse_smiles(smiles[i]);
    if (!result.ok()) {
      errors[i] = result.diagnostics.empty() ? "unparseable" : result.diagnostics.front().message;
      return;
    }
    CorpusMolecule molecule;
    molecule.smiles = chem::write_smiles(*result.graph);
    // Re-parse the canonical form so every record derives from the same graph.
    molecule.graph = chem::parse_smiles(molecule.smiles);
    molecule.fp_bits = fp::morgan_fingerprint(molecule.graph).set_bits;
    parsed[i] = std::move(molecule);
  });
  Corpus corpus;
  for (std::size_t i = 0; i < smiles.size(); ++i) {
    if (parsed[i]) {
      corpus.molecules.push_back(std::move(*parsed[i]));
    } else {
      corpus.rejected.push_back(smiles[i] + ": " + errors[i]);
    }
  }
  return corpus;
}

std::vector<ExampleRecord> build_substructure_examples(const Corpus& corpus, const pattern::PatternLibrary& library,
                                                       const TemplateLibrary& templates,
                                                       const SubstructureOptions& options, std::size_t threads) {
  require_corpus(corpus);
  if (options.quota < 1) throw ArgumentError("substructure quota must be at least 1");
  const auto& set = templates.get("substructure");
  const auto& entries = library.entries();
  const std::size_t n = corpus.molecules.size();

  // hits[e][m]: does molecule m contain entry e.
  std::vector<std::vector<char>> hits(entries.size(), std::vector<char>(n, 0));
  parallel_for(n, threads, [&](std::size_t m) {
    for (std::size_t e = 0; e < entries.size(); ++e) {
      hits[e][m] = pattern::has_substructure(corpus.molecules[m].graph, entries[e].pattern) ? 1 : 0;
    }
  });

  std::vector<ExampleRecord> records;
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const auto& entry = entries[e];
    std::vector<std::size_t> positives, negatives;
    for (std::size_t m = 0; m < n; ++m) (hits[e][m] ? positives : negatives).push_back(m);
    if (static_cast<int>(positives.size()) < options.min_positives || negatives.empty()) {
      spdlog::warn("dropping substructure '{}': {} positives, {} negatives in the corpus", entry.name,
                   positives.size(), negatives.size());
      continue;
    }
    Rng rng(derive_seed(options.seed, hash_string(entry.name)));
    rng.shuffle(positives);
    rng.shuffle(negatives);
    const std::size_t take =
        std::min({static_cast<std::size_t>(options.quota), positives.size(), negatives.size()});
    const auto sub = pattern::display_name(entry.name);
    const Split split = (!entry.seen && options.unseen_to_test) ? Split::test : Split::train;
    for (std::size_t i = 0; i < 2 * take; ++i) {
      const bool positive = i % 2 == 0;
      const auto& molecule = corpus.molecules[positive ? positives[i / 2] : negatives[i / 2]];
      auto record = base_record("substructure", Family::substructure_yn, molecule);
      record.prompt = with_instruction(render_template(pick_template(set, rng), {{"sub", sub}}), yn_instruction());
      record.answer = positive ? "Yes." : "No.";
      record.label = positive ? Label::positive : Label::negative;
      record.split = split;
      record.meta = {{"pattern", entry.name},
                     {"list", std::string(pattern::to_string(entry.list))},
                     {"partition", entry.seen ? "seen" : "unseen"}};
      records.push_back(std::move(record));
    }
  }
  return records;
}

std::string format_property_answer(double value, desc::DescriptorKind kind) {
  if (!std::isfinite(value)) throw ArgumentError("cannot format a non-finite property value");
  char buffer[64];
  if (kind == desc::DescriptorKind::integer) {
    std::snprintf(buffer, sizeof buffer, "%lld.", static_cast<long long>(std::llround(value)));
    return buffer;
  }
  double rounded = std::round(value * 10.0) / 10.0;  // std::round is half away from zero
  if (rounded == 0.0) rounded = 0.0;                  // no "-0.0"
  std::snprintf(buffer, sizeof buffer, "%.1f", rounded);
  return buffer;
}

std::optional<double> parse_property_answer(std::string_view text) {
  auto trimmed = io::trim(text);
  if (!trimmed.empty() && trimmed.back() == '.') trimmed.remove_suffix(1);
  if (trimmed.empty()) return std::nullopt;
  double value = 0;
  const auto* end = trimmed.data() + trimmed.size();
  const auto [ptr, ec] = std::from_chars(trimmed.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::string property_phrase(const desc::DescriptorSpec& spec) {
  static const std::map<std::string, std::string, std::less<>> kPhrases = {
      {"MolWt", "molecular weight"},
      {"HeavyAtomCount", "heavy atoms"},
      {"NumHDonors", "hydrogen-bond donors"},
      {"NumHAcceptors", "hydrogen-bond acceptors"},
      {"TPSA", "topological polar surface area"},
      {"MolLogP", "LogP"},
      {"NumRotatableBonds", "rotatable bonds"},
      {"RingCount", "rings"},
      {"NumAromaticRings", "aromatic rings"},
      {"FractionCSP3", "fraction of sp3 carbons"},
      {"NumHeteroatoms", "heteroatoms"},
      {"NumAtomStereoCenters", "stereocenters"},
  };
  const auto it = kPhrases.find(spec.name);
  if (it != kPhrases.end()) return it->second;
  return pattern::display_name(spec.name) + " groups";
}

std::vector<ExampleRecord> build_property_examples(const Corpus& corpus, std::span<const desc::DescriptorSpec> specs,
                                                   const TemplateLibrary& templates, std::uint64_t seed,
                                                   std::size_t threads) {
  require_corpus(corpus);
  for (const auto& spec : specs) desc::descriptor_spec(spec.name);  // throws on unknown names
  const auto& count_set = templates.get("property_count");
  const auto& real_set = templates.get("property_real");

  std::vector<desc::DescriptorVector> values(corpus.molecules.size());
  parallel_for(corpus.molecules.size(), threads,
               [&](std::size_t m) { values[m] = desc::compute_descriptors(corpus.molecules[m].graph, specs); });

  std::vector<ExampleRecord> records;
  Rng rng(derive_seed(seed, hash_string("property")));
  for (std::size_t m = 0; m < corpus.molecules.size(); ++m) {
    for (const auto& spec : specs) {
      const bool integer = spec.kind == desc::DescriptorKind::integer;
      const double value = values[m].values.at(spec.name);
      auto record = base_record("property", Family::property, corpus.molecules[m]);
      const auto question = render_template(pick_template(integer ? count_set : real_set, rng),
                                            {{"property", property_phrase(spec)}});
      record.prompt = with_instruction(question, integer ? count_instruction() : real_instruction());
      record.answer = format_property_answer(value, spec.kind);
      record.meta = {{"descriptor", spec.name}, {"value", full_precision(value)}};
      records.push_back(std::move(record));
    }
  }
  return records;
}

std::vector<ExampleRecord> build_smiles_recovery_examples(const Corpus& corpus, const TemplateLibrary& templates,
                                                          std::uint64_t seed) {
  require_corpus(corpus);
  const auto& set = templates.get("smiles_recovery");
  Rng rng(derive_seed(seed, hash_string("smiles_recovery")));
  std::vector<ExampleRecord> records;
  for (const auto& molecule : corpus.molecules) {
    auto record = base_record("smiles_recovery", Family::smiles_recovery, molecule);
    record.prompt = render_template(pick_template(set, rng), {});
    record.answer = molecule.smiles;
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<ExampleRecord> build_free_text_prompts(const Corpus& corpus, const std::string& task_id,
                                                   const TemplateLibrary& templates, std::uint64_t seed) {
  require_corpus(corpus);
  const auto& set = templates.get(task_id);
  Rng rng(derive_seed(seed, hash_string(task_id)));
  std::vector<ExampleRecord> records;
  for (const auto& molecule : corpus.molecules) {
    auto record = base_record(task_id, Family::free_text, molecule);
    record.prompt = render_template(pick_template(set, rng), {});
    records.push_back(std::move(record));
  }
  return records;
}

AttachResult attach_external_answers(std::span<const ExampleRecord> prompts, std::string_view answers_jsonl) {
  std::map<std::pair<std::string, std::string>, std::string> answers;
  const auto lines = io::split_lines(answers_jsonl);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (io::trim(lines[i]).empty()) continue;
    const auto where = "answers line " + std::to_string(i + 1) + ": ";
    try {
      const auto doc = nlohmann::json::parse(lines[i]);
      const auto smiles = chem::canonical_smiles(doc.at("smiles").get<std::string>());
      answers[{doc.at("task_id").get<std::string>(), smiles}] = doc.at("answer").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + e.what());
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
  }
  AttachResult result;
  for (const auto& prompt : prompts) {
    const auto it = answers.find({prompt.task_id, prompt.smiles});
    if (it == answers.end()) {
      ++result.missing;
      continue;
    }
    auto record = prompt;
    record.answer = it->second;
    result.records.push_back(std::move(record));
  }
  return result;
}

std::vector<ExampleRecord> upsample_train(std::span<const ExampleRecord> records, std::uint64_t seed) {
  std::vector<std::size_t> positives, negatives;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].split != Split::train) continue;
    if (!records[i].label) throw ArgumentError("train record without a label cannot be balanced");
    (*records[i].label == Label::positive ? positives : negatives).push_back(i);
  }
  if (positives.empty() || negatives.empty()) throw ArgumentError("the train split must contain both classes");
  std::vector<ExampleRecord> out(records.begin(), records.end());
  const auto& minority = positives.size() < negatives.size() ? positives : negatives;
  const std::size_t deficit = std::max(positives.size(), negatives.size()) - minority.size();
  Rng rng(derive_seed(seed, hash_string("upsample")));
  for (std::size_t i = 0; i < deficit; ++i) {
    out.push_back(records[minority[static_cast<std::size_t>(rng.uniform_index(minority.size()))]]);
  }
  return out;
}

std::string downstream_cot_question(const TaskSpec& task, const TemplateLibrary& templates, std::uint64_t seed,
                                    std::size_t index) {
  Rng rng(derive_seed(derive_seed(seed, hash_string(task.task_id + "/cot")), index));
  return with_instruction(render_template(pick_template(templates.get(task.task_id), rng), {}),
                          cot_instruction(task));
}

std::vector<ExampleRecord> build_downstream_yn(std::span<const DownstreamInput> inputs, const TaskSpec& task,
                                               const TemplateLibrary& templates, std::uint64_t seed) {
  const auto& set = templates.get(task.task_id);
  Rng rng(derive_seed(seed, hash_string(task.task_id + "/yn")));
  std::vector<ExampleRecord> records;
  for (const auto& input : inputs) {
    ExampleRecord record;
    const auto graph = chem::parse_smiles(input.smiles);
    record.task_id = task.task_id;
    record.family = Family::downstream_yn;
    record.smiles = chem::write_smiles(graph);
    record.fp_bits = fp::morgan_fingerprint(graph).set_bits;
    record.prompt = with_instruction(render_template(pick_template(set, rng), {}), yn_instruction());
    record.answer = input.label == Label::positive ? "Yes." : "No.";
    record.label = input.label;
    record.split = input.split;
    records.push_back(std::move(record));
  }
  return upsample_train(records, seed);
}

std::vector<std::string> recheck_records(std::span<const ExampleRecord> records,
                                         const pattern::PatternLibrary& library, std::size_t threads) {
  std::vector<std::string> problems(records.size());
  parallel_for(records.size(), threads, [&](std::size_t i) {
    const auto& record = records[i];
    const auto fail = [&](const std::string& reason) {
      problems[i] = "line " + std::to_string(i + 1) + ": " + reason;
    };
    const auto parsed = chem::try_parse_smiles(record.smiles);
    if (!parsed.ok()) return fail("unparseable SMILES '" + record.smiles + "'");
    const auto& graph = *parsed.graph;
    if (chem::write_smiles(graph) != record.smiles) return fail("SMILES is not canonical");
    if (fp::morgan_fingerprint(graph).set_bits != record.fp_bits) return fail("fingerprint bits differ");
    const auto meta = [&](const char* key) -> std::string {
      const auto it = record.meta.find(key);
      return it == record.meta.end() ? std::string() : it->second;
    };
    switch (record.family) {
      case Family::substructure_yn: {
        const auto* entry = library.find(meta("pattern"));
        if (entry == nullptr) return fail("unknown pattern '" + meta("pattern") + "'");
        const bool present = pattern::has_substructure(graph, entry->pattern);
        if (record.answer != (present ? "Yes." : "No.")) return fail("substructure answer disagrees with matcher");
        if (record.label != (present ? Label::positive : Label::negative)) return fail("label disagrees with matcher");
        return;
      }
      case Family::property: {
        const auto name = meta("descriptor");
        const auto& catalog = desc::descriptor_catalog();
        if (std::none_of(catalog.begin(), catalog.end(), [&](const auto& spec) { return spec.name == name; })) {
          return fail("unknown descriptor '" + name + "'");
        }
        const auto specs = desc::descriptor_specs(std::vector<std::string>{name});
        const double value = desc::compute_descriptors(graph, specs).values.at(name);
        if (record.answer != format_property_answer(value, specs.front().kind)) {
          return fail("property answer disagrees with descriptor " + name);
        }
        return;
      }
      case Family::smiles_recovery:
        if (record.answer != record.smiles) return fail("recovery answer is not the canonical SMILES");
        return;
      default:
        return;
    }
  });
  std::erase_if(problems, [](const std::string& p) { return p.empty(); });
  return problems;
}

}  // namespace molforge::forge
