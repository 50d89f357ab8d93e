#include <fmt/format.h>
#include <json.hpp>
#include <memory>
#include <spdlog/spdlog.h>

#include "context.hpp"
#include "molforge/chem/smiles.hpp"
#include "molforge/common/parallel.hpp"
#include "molforge/desc/descriptors.hpp"
#include "molforge/fp/fingerprint.hpp"

namespace molforge::cli {
namespace {

using Json = nlohmann::ordered_json;

struct MoleculeFlags {
  std::vector<std::string> smiles;
  std::string input;
};

void add_molecule_flags(CLI::App* command, MoleculeFlags& flags) {
  command->add_option("--smiles", flags.smiles, "SMILES string (repeatable)");
  command->add_option("--input", flags.input, "File with one SMILES per line ('-' = standard input)");
}

// One JSON document for a single --smiles value, JSON lines otherwise.
std::string render(const std::vector<Json>& docs, bool single) {
  if (single) return docs.front().dump(2) + "\n";
  std::string out;
  for (const auto& doc : docs) out += doc.dump() + "\n";
  return out;
}

bool single_molecule(const MoleculeFlags& flags) { return flags.input.empty() && flags.smiles.size() == 1; }

chem::MolecularGraph parse_or_throw(const SmilesInput& input) {
  auto result = chem::try_parse_smiles(input.smiles);
  if (!result.ok()) {
    const auto& d = result.diagnostics.front();
    throw DataError("cannot parse " + describe(input) + " at position " + std::to_string(d.position) + ": " + d.message);
  }
  return std::move(*result.graph);
}

void add_parse(CLI::App& app, Registry& registry) {
  auto flags = std::make_shared<MoleculeFlags>();
  auto* command = app.add_subcommand("parse", "Parse SMILES and report canonical form, size and diagnostics");
  add_molecule_flags(command, *flags);
  registry.commands.emplace_back(command, [flags](Context& context) {
    const auto inputs = gather_smiles(flags->smiles, flags->input);
    std::vector<Json> docs;
    int failures = 0;
    for (const auto& input : inputs) {
      Json doc;
      doc["input"] = input.smiles;
      const auto result = chem::try_parse_smiles(input.smiles);
      if (result.ok()) {
        doc["canonical"] = chem::write_smiles(*result.graph);
        doc["atoms"] = result.graph->atom_count();
        doc["bonds"] = result.graph->bond_count();
        doc["fragments"] = result.graph->component_count();
      } else {
        doc["canonical"] = nullptr;
        ++failures;
        spdlog::warn("cannot parse {}", describe(input));
      }
      Json diagnostics = Json::array();
      for (const auto& d : result.diagnostics) {
        diagnostics.push_back({{"position", d.position},
                               {"severity", d.severity == chem::Severity::error ? "error" : "warning"},
                               {"message", d.message}});
      }
      doc["diagnostics"] = diagnostics;
      docs.push_back(std::move(doc));
    }
    context.emit(render(docs, single_molecule(*flags)));
    return failures == 0 ? 0 : 2;
  });
}

void add_fingerprint(CLI::App& app, Registry& registry) {
  struct Flags : MoleculeFlags {
    int radius = fp::kDefaultRadius;
    int bits = fp::kDefaultBits;
  };
  auto flags = std::make_shared<Flags>();
  auto* command = app.add_subcommand("fingerprint", "Morgan fingerprint set bits as JSON");
  add_molecule_flags(command, *flags);
  command->add_option("--radius", flags->radius, "Environment radius")->capture_default_str()->check(CLI::Range(0, 8));
  command->add_option("--bits", flags->bits, "Folded width")->capture_default_str()->check(CLI::Range(1, 1 << 20));
  registry.commands.emplace_back(command, [flags](Context& context) {
    const auto inputs = gather_smiles(flags->smiles, flags->input);
    std::vector<Json> docs(inputs.size());
    parallel_for(inputs.size(), context.threads(), [&](std::size_t i) {
      const auto graph = parse_or_throw(inputs[i]);
      const auto fingerprint = fp::morgan_fingerprint(graph, flags->radius, flags->bits);
      docs[i] = {{"smiles", chem::write_smiles(graph)},
                 {"radius", flags->radius},
                 {"n_bits", fingerprint.n_bits},
                 {"bits", fingerprint.set_bits}};
    });
    context.emit(render(docs, single_molecule(*flags)));
    return 0;
  });
}

void add_descriptors(CLI::App& app, Registry& registry) {
  struct Flags : MoleculeFlags {
    std::vector<std::string> names;
    bool all = false;
  };
  auto flags = std::make_shared<Flags>();
  auto* command = app.add_subcommand("descriptors", "Descriptor table as CSV, one column per requested descriptor");
  add_molecule_flags(command, *flags);
  command->add_option("--names", flags->names, "Comma-separated descriptor names (default: the core twelve)")
      ->delimiter(',');
  command->add_flag("--all", flags->all, "Every catalogued descriptor");
  registry.commands.emplace_back(command, [flags](Context& context) {
    std::vector<std::string> names = flags->names;
    if (flags->all) {
      if (!names.empty()) throw UsageError("--all and --names are mutually exclusive");
      for (const auto& spec : desc::descriptor_catalog()) names.push_back(spec.name);
    }
    if (names.empty()) names = core_descriptors();
    const auto specs = desc::descriptor_specs(names);
    const auto inputs = gather_smiles(flags->smiles, flags->input);
    std::vector<std::string> rows(inputs.size());
    parallel_for(inputs.size(), context.threads(), [&](std::size_t i) {
      const auto graph = parse_or_throw(inputs[i]);
      const auto values = desc::compute_descriptors(graph, specs);
      std::string row = values.molecule;
      for (const auto& spec : specs) {
        const double v = values.values.at(spec.name);
        row += spec.kind == desc::DescriptorKind::integer ? fmt::format(",{}", static_cast<long long>(v))
                                                          : fmt::format(",{}", v);
      }
      rows[i] = row + "\n";
    });
    std::string csv = "smiles";
    for (const auto& spec : specs) csv += "," + spec.name;
    csv += "\n";
    for (const auto& row : rows) csv += row;
    context.emit(csv);
    return 0;
  });
}

void add_match(CLI::App& app, Registry& registry) {
  struct Flags : MoleculeFlags {
    std::string pattern;
    bool library = false;
    std::string list;
  };
  auto flags = std::make_shared<Flags>();
  auto* command = app.add_subcommand("match", "Substructure matches of one pattern or of the pattern library");
  add_molecule_flags(command, *flags);
  auto* pattern_flag = command->add_option("--pattern", flags->pattern, "SMARTS pattern");
  auto* library_flag = command->add_flag("--library", flags->library, "Count hits of every library pattern");
  pattern_flag->excludes(library_flag);
  command->add_option("--list", flags->list, "Library list: simple, maccs_like, fragment or textbook")
      ->needs(library_flag);
  registry.commands.emplace_back(command, [flags](Context& context) {
    if (flags->pattern.empty() && !flags->library) throw UsageError("match needs --pattern or --library");
    const auto inputs = gather_smiles(flags->smiles, flags->input);
    std::optional<pattern::Pattern> query;
    std::vector<const pattern::LibraryEntry*> entries;
    if (!flags->pattern.empty()) {
      try {
        query = pattern::parse_pattern(flags->pattern);
      } catch (const pattern::PatternError& e) {
        throw UsageError(std::string("bad --pattern: ") + e.what());
      }
    } else if (!flags->list.empty()) {
      entries = context.patterns().in_list(pattern::list_id_from_string(flags->list));
    } else {
      for (const auto& entry : context.patterns().entries()) entries.push_back(&entry);
    }
    std::vector<Json> docs(inputs.size());
    parallel_for(inputs.size(), context.threads(), [&](std::size_t i) {
      const auto graph = parse_or_throw(inputs[i]);
      Json doc{{"smiles", chem::write_smiles(graph)}};
      if (query) {
        const auto matches = pattern::match_pattern(graph, *query);
        doc["pattern"] = flags->pattern;
        doc["unique_matches"] = pattern::count_unique_matches(graph, *query);
        doc["matches"] = matches;
      } else {
        Json hits = Json::object();
        for (const auto* entry : entries) {
          const int count = pattern::count_unique_matches(graph, entry->pattern);
          if (count > 0) hits[entry->name] = count;
        }
        doc["hits"] = hits;
      }
      docs[i] = std::move(doc);
    });
    context.emit(render(docs, single_molecule(*flags)));
    return 0;
  });
}

}  // namespace

void add_chem_commands(CLI::App& app, Registry& registry) {
  add_parse(app, registry);
  add_fingerprint(app, registry);
  add_descriptors(app, registry);
  add_match(app, registry);
}

}  // namespace molforge::cli
