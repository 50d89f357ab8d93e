#include <json.hpp>
#include <memory>
#include <set>
#include <spdlog/spdlog.h>

#include "context.hpp"
#include "molforge/common/io.hpp"
#include "molforge/ground/groundedness.hpp"

namespace molforge::cli {
namespace {

struct CotText {
  std::string id;
  std::string smiles;
  std::string text;
};

// Objects {cot_id, smiles, text}; "rationale" is accepted in place of "text".
std::vector<CotText> parse_cots(const std::string& path) {
  std::vector<CotText> cots;
  const auto lines = io::split_lines(read_input(path));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (io::trim(lines[i]).empty()) continue;
    try {
      const auto doc = nlohmann::json::parse(lines[i]);
      const auto& text = doc.contains("text") ? doc.at("text") : doc.at("rationale");
      cots.push_back({doc.at("cot_id").get<std::string>(), doc.at("smiles").get<std::string>(), text.get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ": line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return cots;
}

void add_audit(CLI::App& app, Registry& registry) {
  struct Flags {
    std::string cots;
    std::string mentions;
    std::vector<std::string> features;
    std::optional<int> total_cots;
    std::string mentions_out;
  };
  auto flags = std::make_shared<Flags>();
  auto* command =
      app.add_subcommand("audit-groundedness", "Score feature mentions in rationales against computed descriptors");
  auto* cots = command->add_option("--cots", flags->cots, "Rationales JSONL {cot_id, smiles, text}");
  auto* mentions = command->add_option("--mentions", flags->mentions, "External mentions JSONL {cot_id, smiles, feature, value}");
  cots->excludes(mentions);
  command->add_option("--features", flags->features, "Target features (default: the lexicon's, or those mentioned)")
      ->delimiter(',');
  command->add_option("--total-cots", flags->total_cots, "Denominator of occurrence (default: rationales seen)");
  command->add_option("--mentions-out", flags->mentions_out, "Write the extracted mentions JSONL here");
  registry.commands.emplace_back(command, [flags](Context& context) {
    std::vector<ground::Mention> all;
    std::set<std::string> cot_ids;
    std::vector<std::string> features = flags->features;
    if (!flags->cots.empty()) {
      const auto& lexicon = features.empty() ? context.lexicon() : context.lexicon().restricted(features);
      const auto texts = parse_cots(flags->cots);
      for (const auto& cot : texts) {
        cot_ids.insert(cot.id);
        const auto found = ground::extract_mentions(cot.id, cot.smiles, cot.text, lexicon);
        all.insert(all.end(), found.begin(), found.end());
      }
      if (features.empty()) {
        for (const auto& entry : lexicon.entries()) features.push_back(entry.feature);
      }
    } else if (!flags->mentions.empty()) {
      try {
        all = ground::parse_mentions_jsonl(read_input(flags->mentions));
      } catch (const DataError& e) {
        throw DataError(flags->mentions + ": " + e.what());
      }
      std::set<std::string> seen;
      for (const auto& m : all) {
        cot_ids.insert(m.cot_id);
        if (flags->features.empty() && seen.insert(m.feature).second) features.push_back(m.feature);
      }
    } else {
      throw UsageError("audit-groundedness needs --cots or --mentions");
    }
    const int total = flags->total_cots ? *flags->total_cots : static_cast<int>(cot_ids.size());
    std::set<std::string> molecules;
    for (const auto& m : all) {
      if (m.value) molecules.insert(m.smiles);
    }
    const std::vector<std::string> smiles(molecules.begin(), molecules.end());
    const auto truth = ground::compute_ground_truth(smiles, features, context.threads());
    const auto report = ground::audit(all, features, truth, total);
    int suppressed = 0;
    for (const auto& row : report.features) suppressed += row.suppressed ? 1 : 0;
    spdlog::info("audited {} rationales over {} features ({} suppressed below n = {})", total, features.size(),
                 suppressed, ground::kMinReportedCount);
    if (!flags->mentions_out.empty()) io::write_file_atomic(flags->mentions_out, ground::mentions_to_jsonl(all));
    context.emit(ground::report_csv(report));
    return 0;
  });
}

void add_report(CLI::App& app, Registry& registry) {
  struct Flags {
    std::vector<std::string> reports;
    std::string metric = "occurrence";
    bool log_scale = false;
    std::string title;
  };
  auto flags = std::make_shared<Flags>();
  auto* command = app.add_subcommand("report", "Render groundedness report CSVs as an SVG heatmap");
  command->add_option("--report", flags->reports, "label=path of a report CSV (repeatable, one row each)")->required();
  command->add_option("--metric", flags->metric, "occurrence or correctness")
      ->capture_default_str()
      ->check(CLI::IsMember({"occurrence", "correctness"}));
  command->add_flag("--log-scale", flags->log_scale, "Log color scale (occurrence only)");
  command->add_option("--title", flags->title, "Figure title");
  registry.commands.emplace_back(command, [flags](Context& context) {
    std::vector<std::pair<std::string, ground::GroundednessReport>> rows;
    for (const auto& spec : flags->reports) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos || eq == 0) throw UsageError("--report expects label=path, got '" + spec + "'");
      const auto path = spec.substr(eq + 1);
      try {
        rows.emplace_back(spec.substr(0, eq), ground::parse_report_csv(read_input(path)));
      } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
      }
    }
    ground::HeatmapOptions options;
    options.metric = flags->metric == "correctness" ? ground::HeatmapMetric::correctness : ground::HeatmapMetric::occurrence;
    if (flags->log_scale && options.metric != ground::HeatmapMetric::occurrence) {
      throw UsageError("--log-scale applies to the occurrence metric only");
    }
    options.log_scale = flags->log_scale;
    options.title = flags->title;
    context.emit(ground::render_heatmap_svg(rows, options));
    return 0;
  });
}

}  // namespace

void add_ground_commands(CLI::App& app, Registry& registry) {
  add_audit(app, registry);
  add_report(app, registry);
}

}  // namespace molforge::cli
