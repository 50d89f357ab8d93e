#include <fmt/format.h>
#include <json.hpp>
#include <memory>
#include <set>
#include <spdlog/spdlog.h>

#include "context.hpp"
#include "molforge/chem/smiles.hpp"
#include "molforge/common/io.hpp"
#include "molforge/common/parallel.hpp"
#include "molforge/common/rng.hpp"
#include "molforge/forest/forest.hpp"
#include "molforge/forge/records.hpp"
#include "molforge/fp/fingerprint.hpp"
#include "molforge/metrics/metrics.hpp"
#include "molforge/toy/nitrogen.hpp"
#include "molforge/toy/tokenizer.hpp"
#include "molforge/toy/train.hpp"

namespace molforge::cli {
namespace {

using Json = nlohmann::ordered_json;

Json optional_number(const std::optional<double>& value) { return value ? Json(*value) : Json(nullptr); }

// Canonical SMILES when parseable, the text itself otherwise.
std::string molecule_key(const std::string& smiles) {
  const auto parsed = chem::try_parse_smiles(smiles);
  return parsed.ok() ? chem::write_smiles(*parsed.graph) : smiles;
}

void add_rf_baseline(CLI::App& app, Registry& registry) {
  struct Flags {
    std::string input;
    std::string task;
    std::string metric;
    std::vector<std::string> descriptors;
    std::optional<int> trees;
    std::string save_model;
    std::string importance_out;
    int top = 20;
  };
  auto flags = std::make_shared<Flags>();
  auto* command = app.add_subcommand("rf-baseline", "Descriptor random-forest baseline on a labeled CSV");
  command->add_option("--input", flags->input, "Labeled CSV (smiles,label[,split])")->required();
  command->add_option("--task", flags->task, "Task id; selects the metric");
  command->add_option("--metric", flags->metric, "roc_auc, pr_auc or accuracy (overrides the task's metric)")
      ->check(CLI::IsMember({"roc_auc", "pr_auc", "accuracy"}));
  command->add_option("--descriptors", flags->descriptors, "Feature descriptors (default: the whole catalog)")
      ->delimiter(',');
  command->add_option("--trees", flags->trees, "Number of trees (overrides the run config)");
  command->add_option("--save-model", flags->save_model, "Write the fitted forest checkpoint here");
  command->add_option("--importance-out", flags->importance_out, "Write feature,importance,rank CSV here");
  command->add_option("--top", flags->top, "Top features listed in the result")->capture_default_str();
  registry.commands.emplace_back(command, [flags](Context& context) {
    const auto seed = context.seed("rf-baseline");
    const auto threads = context.threads();
    metrics::Metric metric = metrics::Metric::roc_auc;
    std::string task_id = "custom";
    if (!flags->task.empty()) {
      const auto& task = context.task(flags->task);
      metric = task.metric;
      task_id = task.task_id;
    }
    if (!flags->metric.empty()) metric = metrics::metric_from_string(flags->metric);
    if (!metrics::is_classification(metric)) throw UsageError("rf-baseline scores binary classification only");

    std::vector<std::string> names = flags->descriptors;
    if (names.empty()) {
      for (const auto& spec : desc::descriptor_catalog()) names.push_back(spec.name);
    }
    const auto specs = desc::descriptor_specs(names);
    const auto data = load_labeled(flags->input, seed, threads);
    const auto train = rows_in(data, forge::Split::train);
    const auto test = rows_in(data, forge::Split::test);
    const auto skipped = data.smiles.size() - train.size() - test.size();
    if (skipped > 0) spdlog::info("{} validation rows are not used", skipped);
    const auto subset = [&](const std::vector<std::size_t>& rows) {
      std::vector<chem::MolecularGraph> graphs;
      std::vector<int> labels;
      for (const auto row : rows) {
        graphs.push_back(data.graphs[row]);
        labels.push_back(data.labels[row]);
      }
      return std::pair{descriptor_matrix(graphs, specs, threads), labels};
    };
    const auto [train_x, train_y] = subset(train);
    const auto [test_x, test_y] = subset(test);
    const auto has_both = [](const std::vector<int>& y) {
      return std::count(y.begin(), y.end(), 1) > 0 && std::count(y.begin(), y.end(), 0) > 0;
    };
    if (!has_both(train_y)) throw DataError("the train split needs both classes");
    if (!has_both(test_y) && metric != metrics::Metric::accuracy) {
      throw DataError("the test split needs both classes for " + std::string(metrics::to_string(metric)));
    }

    auto config = context.config().forest;
    if (flags->trees) config.n_trees = *flags->trees;
    const auto forest = forest::fit_forest(train_x, train_y, config, seed, names, threads);
    const auto scores = forest.predict_proba(test_x);
    double value = 0;
    switch (metric) {
      case metrics::Metric::roc_auc:
        value = metrics::roc_auc(scores, test_y);
        break;
      case metrics::Metric::pr_auc:
        value = metrics::pr_auc(scores, test_y);
        break;
      default: {
        std::vector<int> predicted;
        for (const double s : scores) predicted.push_back(s >= 0.5 ? 1 : 0);
        value = metrics::accuracy(predicted, test_y);
      }
    }
    const auto importance = forest::gini_importance(forest);
    if (!flags->save_model.empty()) forest::save_forest(forest, flags->save_model);
    if (!flags->importance_out.empty()) {
      std::string csv = "feature,importance,rank\n";
      for (std::size_t i = 0; i < importance.names.size(); ++i) {
        csv += fmt::format("{},{},{}\n", importance.names[i], importance.importance[i], importance.rank[i]);
      }
      io::write_file_atomic(flags->importance_out, csv);
    }
    Json result{{"task", task_id},
                {"metric", metrics::to_string(metric)},
                {"value", value},
                {"n_train", train.size()},
                {"n_test", test.size()},
                {"n_features", names.size()},
                {"n_trees", config.n_trees},
                {"seed", seed},
                {"top_features", forest::top_k_features(importance, flags->top)}};
    context.emit(result.dump(2) + "\n");
    return 0;
  });
}

std::optional<std::vector<float>> molecule_vector(const forge::ExampleRecord& record, int bits) {
  if (record.prompt.find(forge::kMoleculeMarker) == std::string::npos) return std::nullopt;
  std::vector<float> dense(static_cast<std::size_t>(bits), 0.0f);
  for (const int bit : record.fp_bits) {
    if (bit < 0 || bit >= bits) throw DataError("fingerprint bit " + std::to_string(bit) + " outside the model width");
    dense[static_cast<std::size_t>(bit)] = 1.0f;
  }
  return dense;
}

std::vector<forge::ExampleRecord> load_records(const std::string& path) {
  try {
    return forge::parse_jsonl(read_input(path));
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void add_train_toy(CLI::App& app, Registry& registry) {
  struct Flags {
    std::string input;
    bool nitrogen = false;
    int molecules = 2000;
    bool zero_molecule = false;
    std::string checkpoint;
    std::optional<int> steps;
    std::optional<int> batch_size;
    std::optional<double> lr;
    std::string trace;
  };
  auto flags = std::make_shared<Flags>();
  auto* command = app.add_subcommand("train-toy", "Train the toy decoder and write a checkpoint");
  auto* input = command->add_option("--input", flags->input, "Training records JSONL (train split is used)");
  auto* nitrogen = command->add_flag("--nitrogen", flags->nitrogen, "Train and evaluate the contains-nitrogen check");
  input->excludes(nitrogen);
  command->add_option("--molecules", flags->molecules, "Corpus size for --nitrogen")->capture_default_str();
  command->add_flag("--zero-molecule", flags->zero_molecule, "Zero every molecule vector (--nitrogen control)");
  command->add_option("--checkpoint", flags->checkpoint, "Checkpoint output path")->required();
  command->add_option("--steps", flags->steps, "Optimizer steps");
  command->add_option("--batch-size", flags->batch_size, "Examples per step");
  command->add_option("--lr", flags->lr, "Backbone learning rate; the projector uses ten times this");
  command->add_option("--trace", flags->trace, "Write step,loss,lr_backbone,lr_projector CSV here");
  registry.commands.emplace_back(command, [flags](Context& context) {
    const auto seed = context.seed("train-toy");
    if (flags->input.empty() && !flags->nitrogen) throw UsageError("train-toy needs --input or --nitrogen");
    const auto apply = [&](toy::TrainConfig& config) {
      if (flags->steps) config.steps = *flags->steps;
      if (flags->batch_size) config.batch_size = *flags->batch_size;
      if (flags->lr) {
        config.lr_backbone = *flags->lr;
        config.lr_projector = 10 * *flags->lr;
      }
      config.seed = seed;
      config.validate();
    };
    Json summary;
    std::vector<toy::StepRecord> trace;
    toy::Checkpoint checkpoint;
    if (flags->nitrogen) {
      toy::NitrogenConfig config;
      config.molecules = flags->molecules;
      config.zero_molecule = flags->zero_molecule;
      config.seed = seed;
      apply(config.train);
      auto result = toy::run_nitrogen_experiment(config);
      checkpoint = {std::move(result.model), config.train, derive_seed(seed, 1)};
      summary = {{"mode", "nitrogen"},
                 {"zero_molecule", flags->zero_molecule},
                 {"train_size", result.train_size},
                 {"test_size", result.test_size},
                 {"train_loss", result.train_loss},
                 {"test_accuracy", result.test_accuracy},
                 {"seconds", result.seconds}};
    } else {
      const auto& model_config = context.config().toy_model;
      std::vector<toy::Sequence> sequences;
      int too_long = 0;
      for (const auto& record : load_records(flags->input)) {
        if (record.split != forge::Split::train || record.answer.empty()) continue;
        try {
          auto encoded = toy::encode_example(record.prompt, record.answer, model_config.max_seq_len);
          sequences.push_back({std::move(encoded.tokens), std::move(encoded.loss_mask),
                               molecule_vector(record, model_config.fingerprint_bits)});
        } catch (const ArgumentError&) {
          ++too_long;
        }
      }
      if (too_long > 0) spdlog::warn("{} records exceed {} tokens and were skipped", too_long, model_config.max_seq_len);
      if (sequences.empty()) throw DataError(flags->input + ": no trainable train-split records");
      auto config = context.config().toy_train;
      apply(config);
      checkpoint.model = toy::ToyModel<float>::initialize(model_config, derive_seed(seed, 1));
      checkpoint.init_seed = derive_seed(seed, 1);
      checkpoint.train = config;
      Rng sampler(derive_seed(seed, 2));
      const auto result = toy::train(
          checkpoint.model, [&] { return sequences[sampler.uniform_index(sequences.size())]; }, config,
          [&](const toy::StepRecord& step) {
            if (config.log_every > 0 && (step.step + 1) % config.log_every == 0) {
              spdlog::info("step {} loss {:.4f} lr {:.3g}/{:.3g}", step.step + 1, step.loss, step.lr_backbone,
                           step.lr_projector);
            }
          });
      trace = result.trace;
      summary = {{"mode", "records"},
                 {"sequences", sequences.size()},
                 {"steps", config.steps},
                 {"final_loss", trace.empty() ? 0.0 : trace.back().loss}};
    }
    toy::save_checkpoint(flags->checkpoint, checkpoint);
    if (!flags->trace.empty()) {
      std::string csv = "step,loss,lr_backbone,lr_projector\n";
      for (const auto& s : trace) csv += fmt::format("{},{},{},{}\n", s.step, s.loss, s.lr_backbone, s.lr_projector);
      io::write_file_atomic(flags->trace, csv);
    }
    summary["parameters"] = checkpoint.model.parameter_count();
    summary["checkpoint"] = flags->checkpoint;
    context.emit(summary.dump(2) + "\n");
    return 0;
  });
}

void add_rollout(CLI::App& app, Registry& registry) {
  struct Flags {
    std::string checkpoint;
    std::string input;
    std::vector<std::string> smiles;
    std::string prompt = toy::kNitrogenPrompt;
    std::string split;
    int n = 8;
    double temperature = 0.6;
  };
  auto flags = std::make_shared<Flags>();
  auto* command = app.add_subcommand("rollout", "Sample answers from a toy checkpoint as JSON lines");
  command->add_option("--checkpoint", flags->checkpoint, "Toy model checkpoint")->required();
  command->add_option("--input", flags->input, "Records JSONL supplying prompt, SMILES and fingerprint bits");
  command->add_option("--smiles", flags->smiles, "Molecule for --prompt (repeatable)");
  command->add_option("--prompt", flags->prompt, "Prompt for --smiles molecules")->capture_default_str();
  command->add_option("--split", flags->split, "Only records of this split")->check(CLI::IsMember({"train", "valid", "test"}));
  command->add_option("--n", flags->n, "Generations per molecule")->capture_default_str()->check(CLI::PositiveNumber);
  command->add_option("--temperature", flags->temperature, "Sampling temperature (<= 0 is greedy)")
      ->capture_default_str();
  registry.commands.emplace_back(command, [flags](Context& context) {
    const auto seed = context.seed("rollout");
    const auto model = toy::load_checkpoint(flags->checkpoint).model;
    std::vector<forge::ExampleRecord> jobs;
    if (!flags->input.empty()) {
      std::set<std::pair<std::string, std::string>> seen;
      for (auto& record : load_records(flags->input)) {
        if (!flags->split.empty() && record.split != forge::split_from_string(flags->split)) continue;
        if (seen.insert({record.smiles, record.prompt}).second) jobs.push_back(std::move(record));
      }
    }
    for (const auto& s : flags->smiles) {
      const auto parsed = chem::try_parse_smiles(s);
      if (!parsed.ok()) throw DataError("cannot parse SMILES '" + s + "'");
      forge::ExampleRecord record;
      record.smiles = chem::write_smiles(*parsed.graph);
      record.prompt = flags->prompt;
      record.fp_bits = fp::morgan_fingerprint(*parsed.graph, fp::kDefaultRadius, model.config.fingerprint_bits).set_bits;
      jobs.push_back(std::move(record));
    }
    if (jobs.empty()) throw UsageError("rollout needs --input records or --smiles");
    std::vector<std::string> lines(jobs.size());
    parallel_for(jobs.size(), context.threads(), [&](std::size_t i) {
      toy::GenerateOptions options;
      options.n = flags->n;
      options.temperature = flags->temperature;
      options.seed = derive_seed(seed, i);
      const auto generations = toy::generate(model, toy::encode_prompt(jobs[i].prompt),
                                             molecule_vector(jobs[i], model.config.fingerprint_bits), options);
      lines[i] = Json{{"molecule", jobs[i].smiles}, {"prompt", jobs[i].prompt}, {"generations", generations}}.dump() +
                 "\n";
    });
    std::string out;
    for (const auto& line : lines) out += line;
    context.emit(out);
    return 0;
  });
}

void add_score(CLI::App& app, Registry& registry) {
  struct Flags {
    std::string rollouts;
    std::string labels;
    std::string task;
    std::string format = "yn";
  };
  auto flags = std::make_shared<Flags>();
  auto* command = app.add_subcommand("score", "Score rollouts against labels with the task metric");
  command->add_option("--rollouts", flags->rollouts, "Rollouts JSONL {molecule, generations[]}")->required();
  command->add_option("--labels", flags->labels, "Labeled CSV (smiles,label)")->required();
  command->add_option("--task", flags->task, "Task id")->required();
  command->add_option("--format", flags->format, "yn or cot")->capture_default_str()->check(CLI::IsMember({"yn", "cot"}));
  registry.commands.emplace_back(command, [flags](Context& context) {
    const auto& task = context.task(flags->task);
    const auto format = metrics::answer_format_from_string(flags->format);
    const bool cot = format == metrics::AnswerFormat::cot;
    const std::string positive = cot ? task.positive_label : "yes";
    const std::vector<std::string> vocab = cot ? task.cot_vocab() : std::vector<std::string>{"yes", "no"};

    std::vector<metrics::ScoredMolecule> scored;
    const auto lines = io::split_lines(read_input(flags->rollouts));
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (io::trim(lines[i]).empty()) continue;
      const auto where = flags->rollouts + ": line " + std::to_string(i + 1);
      metrics::RolloutSet set;
      try {
        const auto doc = nlohmann::json::parse(lines[i]);
        set.molecule = molecule_key(doc.at("molecule").get<std::string>());
        set.generations = doc.at("generations").get<std::vector<std::string>>();
      } catch (const nlohmann::json::exception& e) {
        throw DataError(where + ": " + e.what());
      }
      if (set.generations.empty()) throw DataError(where + ": no generations");
      set.format = format;
      set.positive_label = positive;
      set.label_vocab = vocab;
      scored.push_back(metrics::rollout_score(set));
    }
    std::map<std::string, double> truth;
    for (const auto& row : forge::parse_labeled_csv(read_input(flags->labels))) {
      truth[molecule_key(row.smiles)] = row.label;
    }
    const auto evaluation = metrics::evaluate_task(scored, truth, {task.task_id, task.metric, positive});
    Json molecules = Json::array();
    for (const auto& m : scored) {
      molecules.push_back({{"molecule", m.molecule},
                           {"score", optional_number(m.score)},
                           {"n_parseable", m.n_parseable},
                           {"n_positive", m.n_positive}});
    }
    Json result{{"task", task.task_id},
                {"metric", metrics::to_string(evaluation.metric)},
                {"value", optional_number(evaluation.value)},
                {"n_scored", evaluation.n_scored},
                {"n_excluded", evaluation.n_excluded},
                {"n_unlabeled", evaluation.n_unlabeled},
                {"excluded", evaluation.excluded_molecules},
                {"molecules", molecules}};
    context.emit(result.dump(2) + "\n");
    return 0;
  });
}

}  // namespace

void add_model_commands(CLI::App& app, Registry& registry) {
  add_rf_baseline(app, registry);
  add_train_toy(app, registry);
  add_rollout(app, registry);
  add_score(app, registry);
}

}  // namespace molforge::cli
