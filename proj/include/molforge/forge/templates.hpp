#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "molforge/metrics/metrics.hpp"

namespace molforge::forge {

constexpr std::string_view kMoleculeMarker = "<molecule>";

// Replaces every {name} slot with its value; the <molecule> marker is kept
// verbatim. Throws ArgumentError naming the first slot without a value and
// on an unterminated brace.
std::string render_template(std::string_view templ, const std::map<std::string, std::string>& slots);

// Slot names used by a template, in order of first appearance.
std::vector<std::string> template_slots(std::string_view templ);

struct TemplateSet {
  std::string task_id;
  std::vector<std::string> templates;
};

class TemplateLibrary {
 public:
  // Lines: task_id<TAB>template; '#' comments. Every set must hold 5 to 20
  // templates, each with exactly one <molecule> marker. Throws DataError.
  static TemplateLibrary parse(std::string_view text);
  static TemplateLibrary load(const std::string& path);
  static const TemplateLibrary& builtin();

  // Throws ArgumentError for an unknown task.
  const TemplateSet& get(std::string_view task_id) const;
  bool contains(std::string_view task_id) const;
  const std::map<std::string, TemplateSet, std::less<>>& sets() const { return sets_; }

 private:
  std::map<std::string, TemplateSet, std::less<>> sets_;
};

// A downstream classification task.
struct TaskSpec {
  std::string task_id;
  std::string display_name;
  metrics::Metric metric = metrics::Metric::roc_auc;
  std::string positive_label = "yes";  // chain-of-thought vocabulary
  std::string negative_label = "no";

  std::vector<std::string> cot_vocab() const { return {positive_label, negative_label}; }
};

class TaskTable {
 public:
  // Lines: task_id, display_name, metric, positive_label, negative_label
  // (tab-separated); '#' comments. Throws DataError.
  static TaskTable parse(std::string_view text);
  static TaskTable load(const std::string& path);
  static const TaskTable& builtin();

  // Throws ArgumentError listing the known ids.
  const TaskSpec& get(std::string_view task_id) const;
  const std::vector<TaskSpec>& tasks() const { return tasks_; }

 private:
  std::vector<TaskSpec> tasks_;
};

// Answer-format suffixes appended to rendered questions.
std::string yn_instruction();
std::string count_instruction();
std::string real_instruction();
std::string cot_instruction(const TaskSpec& task);

}  // namespace molforge::forge
