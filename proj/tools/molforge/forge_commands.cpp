#include <json.hpp>
#include <memory>
#include <set>
#include <spdlog/spdlog.h>

#include "context.hpp"
#include "molforge/common/io.hpp"
#include "molforge/common/rng.hpp"
#include "molforge/forest/forest.hpp"
#include "molforge/forge/builders.hpp"
#include "molforge/forge/cot.hpp"
#include "molforge/forge/mixture.hpp"
#include "molforge/forge/records.hpp"
#include "molforge/fp/fingerprint.hpp"
#include "molforge/toy/tokenizer.hpp"
#include "molforge/toy/train.hpp"

namespace molforge::cli {
namespace {

using Json = nlohmann::ordered_json;

std::string to_jsonl(std::span<const forge::ExampleRecord> records) {
  std::string out;
  for (const auto& record : records) out += forge::record_to_json(record) + "\n";
  return out;
}

void add_build_dataset(CLI::App& app, Registry& registry) {
  struct Flags {
    std::string input;
    std::vector<std::string> families{"substructure", "property"};
    int quota = 50;
    int min_positives = 3;
    std::vector<std::string> descriptors;
    std::string free_text_task;
    std::string answers;
    std::string downstream;
    std::string task;
    std::string mixture;
    std::size_t samples = 0;
    bool no_verify = false;
  };
  auto flags = std::make_shared<Flags>();
  auto* command = app.add_subcommand("build-dataset", "Build instruction records as JSON lines");
  command->add_option("--input", flags->input, "Molecule corpus, one SMILES per line");
  command->add_option("--families", flags->families, "substructure, property, smiles_recovery, free_text")
      ->delimiter(',')
      ->check(CLI::IsMember({"substructure", "property", "smiles_recovery", "free_text"}))
      ->capture_default_str();
  command->add_option("--quota", flags->quota, "Positives (and negatives) per pattern")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  command->add_option("--min-positives", flags->min_positives, "Patterns with fewer matches are dropped")
      ->capture_default_str();
  command->add_option("--descriptors", flags->descriptors, "Property descriptors (default: the core twelve)")
      ->delimiter(',');
  command->add_option("--free-text-task", flags->free_text_task, "Task id of the free-text prompts");
  command->add_option("--answers", flags->answers, "External answers JSONL {task_id, smiles, answer}");
  command->add_option("--downstream", flags->downstream, "Labeled CSV (smiles,label[,split]) for yes/no records");
  command->add_option("--task", flags->task, "Downstream task id");
  command->add_option("--mixture", flags->mixture, "Mixture YAML (weights per task id, seed)");
  command->add_option("--samples", flags->samples, "Draw this many records from the mixture");
  command->add_flag("--no-verify", flags->no_verify, "Skip recomputing every answer before writing");
  registry.commands.emplace_back(command, [flags](Context& context) {
    const auto seed = context.seed("build-dataset");
    const auto threads = context.threads();
    const std::set<std::string> families(flags->families.begin(), flags->families.end());
    std::vector<forge::ExampleRecord> records;

    if (!flags->input.empty()) {
      const auto inputs = gather_smiles({}, flags->input);
      std::vector<std::string> smiles;
      for (const auto& input : inputs) smiles.push_back(input.smiles);
      const auto corpus = forge::prepare_corpus(smiles, threads);
      for (const auto& rejected : corpus.rejected) spdlog::warn("skipping molecule {}", rejected);
      spdlog::info("corpus: {} molecules, {} rejected", corpus.molecules.size(), corpus.rejected.size());
      const auto append = [&](std::vector<forge::ExampleRecord> more) {
        records.insert(records.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
      };
      if (families.contains("substructure")) {
        forge::SubstructureOptions options;
        options.quota = flags->quota;
        options.min_positives = flags->min_positives;
        options.seed = seed;
        append(forge::build_substructure_examples(corpus, context.patterns(), context.templates(), options, threads));
      }
      if (families.contains("property")) {
        const auto names = flags->descriptors.empty() ? core_descriptors() : flags->descriptors;
        append(forge::build_property_examples(corpus, desc::descriptor_specs(names), context.templates(), seed,
                                              threads));
      }
      if (families.contains("smiles_recovery")) {
        append(forge::build_smiles_recovery_examples(corpus, context.templates(), seed));
      }
      if (families.contains("free_text")) {
        if (flags->free_text_task.empty()) throw UsageError("the free_text family needs --free-text-task");
        auto prompts = forge::build_free_text_prompts(corpus, flags->free_text_task, context.templates(), seed);
        if (flags->answers.empty()) {
          spdlog::warn("no --answers given: free-text records are prompt-only");
          append(std::move(prompts));
        } else {
          auto attached = forge::attach_external_answers(prompts, read_input(flags->answers));
          if (attached.missing > 0) spdlog::warn("{} free-text prompts had no external answer", attached.missing);
          append(std::move(attached.records));
        }
      }
    }
    if (!flags->downstream.empty()) {
      if (flags->task.empty()) throw UsageError("--downstream needs --task");
      const auto& task = context.task(flags->task);
      const auto data = load_labeled(flags->downstream, seed, threads);
      std::vector<forge::DownstreamInput> inputs;
      for (std::size_t i = 0; i < data.smiles.size(); ++i) {
        inputs.push_back({data.smiles[i], data.labels[i] == 1 ? forge::Label::positive : forge::Label::negative,
                          data.splits[i]});
      }
      auto yn = forge::build_downstream_yn(inputs, task, context.templates(), seed);
      records.insert(records.end(), yn.begin(), yn.end());
    }
    if (flags->input.empty() && flags->downstream.empty()) throw UsageError("build-dataset needs --input or --downstream");

    if (!flags->no_verify) {
      const auto problems = forge::recheck_records(records, context.patterns(), threads);
      for (const auto& problem : problems) spdlog::error("recheck: {}", problem);
      if (!problems.empty()) throw DataError(std::to_string(problems.size()) + " records failed the answer recheck");
      spdlog::info("recheck passed for {} records", records.size());
    }

    std::map<std::string, std::vector<forge::ExampleRecord>> pools;
    for (const auto& record : records) pools[record.task_id].push_back(record);
    for (const auto& [task, pool] : pools) spdlog::info("task {}: {} records", task, pool.size());

    std::optional<forge::MixtureConfig> mixture;
    if (!flags->mixture.empty()) {
      mixture = load_mixture_config(flags->mixture);
    } else if (flags->samples > 0) {
      mixture = context.config().mixture;
      if (!mixture) throw UsageError("--samples needs --mixture or a 'mixture' section in the run config");
    }
    if (mixture) {
      if (flags->samples == 0) throw UsageError("--mixture needs --samples");
      forge::MixtureSampler sampler(*mixture, pools);
      records = sampler.sample(flags->samples);
      spdlog::info("sampled {} records from the mixture", records.size());
    }
    context.emit(to_jsonl(records));
    return 0;
  });
}

// Text-only continuation by a toy checkpoint; long prompts keep their tail.
class ToyTextGenerator : public forge::TextGenerator {
 public:
  explicit ToyTextGenerator(toy::ToyModel<float> model) : model_(std::move(model)) {}

  std::string generate(const std::string& prompt, double temperature, std::uint64_t seed) override {
    auto tokens = toy::encode_prompt(prompt);
    for (auto& token : tokens) {
      if (token == toy::Tokenizer::kMolecule) token = toy::Tokenizer::kUnk;
    }
    const auto keep = static_cast<std::size_t>(std::max(2, model_.config.max_seq_len * 3 / 4));
    if (tokens.size() > keep) {
      std::vector<int> tail{toy::Tokenizer::kBos};
      tail.insert(tail.end(), tokens.end() - static_cast<std::ptrdiff_t>(keep - 1), tokens.end());
      tokens = std::move(tail);
    }
    toy::GenerateOptions options;
    options.temperature = temperature;
    options.seed = seed;
    return toy::generate(model_, tokens, std::nullopt, options).front();
  }

 private:
  toy::ToyModel<float> model_;
};

std::unique_ptr<forge::TextGenerator> make_generator(const std::string& spec,
                                                     const std::vector<std::string>& stub_responses,
                                                     const std::string& checkpoint) {
  if (spec == "stub") {
    if (stub_responses.empty()) throw UsageError("--generator stub needs at least one --stub-response");
    return std::make_unique<forge::ScriptedGenerator>(stub_responses);
  }
  if (spec == "toy") {
    if (checkpoint.empty()) throw UsageError("--generator toy needs --checkpoint");
    return std::make_unique<ToyTextGenerator>(toy::load_checkpoint(checkpoint).model);
  }
  if (spec.starts_with("command:")) return std::make_unique<forge::CommandGenerator>(spec.substr(8));
  throw UsageError("--generator must be stub, toy or command:<argv>, got '" + spec + "'");
}

void add_synthesize_cot(CLI::App& app, Registry& registry) {
  struct Flags {
    std::string input;
    std::string task;
    std::string generator = "stub";
    std::vector<std::string> stub_responses;
    std::string checkpoint;
    std::string preamble;
    std::string decomposition;
    std::string importance;
    int top_k = 20;
    int max_attempts = 5;
    double temperature = 0.7;
    bool all_splits = false;
    std::string rejected;
  };
  auto flags = std::make_shared<Flags>();
  auto* command = app.add_subcommand("synthesize-cot", "Collect label-consistent chain-of-thought records");
  command->add_option("--input", flags->input, "Labeled CSV (smiles,label[,split])")->required();
  command->add_option("--task", flags->task, "Downstream task id")->required();
  command->add_option("--generator", flags->generator, "stub, toy or command:<argv>")->capture_default_str();
  command->add_option("--stub-response", flags->stub_responses, "Scripted response, replayed in order (repeatable)");
  command->add_option("--checkpoint", flags->checkpoint, "Toy model checkpoint for --generator toy");
  command->add_option("--preamble", flags->preamble, "File with the literature preamble");
  command->add_option("--decomposition", flags->decomposition, "File with the structural decomposition");
  command->add_option("--importance", flags->importance, "Forest checkpoint ranking the descriptors");
  command->add_option("--top-k", flags->top_k, "Descriptors in the prompt")->capture_default_str();
  command->add_option("--max-attempts", flags->max_attempts, "Generator calls per molecule")->capture_default_str();
  command->add_option("--temperature", flags->temperature, "Sampling temperature")->capture_default_str();
  command->add_flag("--all-splits", flags->all_splits, "Also author rationales for valid and test rows");
  command->add_option("--rejected", flags->rejected, "JSONL of dropped molecules and their attempts");
  registry.commands.emplace_back(command, [flags](Context& context) {
    const auto seed = context.seed("synthesize-cot");
    const auto threads = context.threads();
    const auto& task = context.task(flags->task);
    auto generator = make_generator(flags->generator, flags->stub_responses, flags->checkpoint);
    const auto data = load_labeled(flags->input, seed, threads);
    const auto preamble = flags->preamble.empty() ? std::string() : read_input(flags->preamble);
    const auto decomposition = flags->decomposition.empty() ? std::string() : read_input(flags->decomposition);

    forest::RandomForest forest;
    if (!flags->importance.empty()) {
      forest = forest::load_forest(flags->importance);
    } else {
      const auto train = rows_in(data, forge::Split::train);
      std::vector<std::string> names;
      for (const auto& spec : desc::descriptor_catalog()) names.push_back(spec.name);
      const auto specs = desc::descriptor_specs(names);
      std::vector<chem::MolecularGraph> graphs;
      std::vector<int> labels;
      for (const auto row : train) {
        graphs.push_back(data.graphs[row]);
        labels.push_back(data.labels[row]);
      }
      forest = forest::fit_forest(descriptor_matrix(graphs, specs, threads), labels, context.config().forest, seed,
                                  names, threads);
    }
    const auto importance = forest::gini_importance(forest);

    std::vector<forge::ExampleRecord> accepted;
    std::string rejected;
    int considered = 0;
    for (std::size_t i = 0; i < data.smiles.size(); ++i) {
      if (!flags->all_splits && data.splits[i] != forge::Split::train) continue;
      ++considered;
      const auto bundle = forge::assemble_cot_prompt(preamble, data.graphs[i], decomposition, importance, flags->top_k);
      const auto prompt = forge::render_cot_prompt(bundle, task);
      const auto& expected = data.labels[i] == 1 ? task.positive_label : task.negative_label;
      forge::CotOptions options;
      options.max_attempts = flags->max_attempts;
      options.temperature = flags->temperature;
      options.seed = derive_seed(seed, i);
      const auto outcome = forge::synthesize_cot(prompt, expected, task, *generator, options);
      if (outcome.accepted) {
        const auto question = forge::downstream_cot_question(task, context.templates(), seed, i);
        accepted.push_back(forge::cot_record(task, question, bundle, fp::morgan_fingerprint(data.graphs[i]).set_bits,
                                             data.labels[i] == 1 ? forge::Label::positive : forge::Label::negative,
                                             data.splits[i], outcome));
        continue;
      }
      Json attempts = Json::array();
      for (const auto& attempt : outcome.attempts) {
        attempts.push_back({{"response", attempt.response},
                            {"parsed_label", attempt.parsed_label ? Json(*attempt.parsed_label) : Json(nullptr)},
                            {"error", attempt.error}});
      }
      rejected += Json{{"smiles", data.smiles[i]}, {"expected", expected}, {"attempts", attempts}}.dump() + "\n";
    }
    const auto dropped = considered - static_cast<int>(accepted.size());
    spdlog::info("chain of thought: {} accepted, {} dropped after {} attempts", accepted.size(), dropped,
                 flags->max_attempts);
    if (!flags->rejected.empty()) io::write_file_atomic(flags->rejected, rejected);
    context.emit(to_jsonl(accepted));
    return 0;
  });
}

}  // namespace

void add_forge_commands(CLI::App& app, Registry& registry) {
  add_build_dataset(app, registry);
  add_synthesize_cot(app, registry);
}

}  // namespace molforge::cli
