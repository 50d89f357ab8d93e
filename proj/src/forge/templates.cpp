#include "molforge/forge/templates.hpp"

#include <algorithm>

#include "molforge/common/error.hpp"
#include "molforge/common/io.hpp"
#include "molforge/data/embedded.hpp"

namespace molforge::forge {
namespace {

constexpr std::size_t kMinTemplates = 5;
constexpr std::size_t kMaxTemplates = 20;

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t count = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

bool is_comment_or_blank(std::string_view line) {
  const auto trimmed = io::trim(line);
  return trimmed.empty() || trimmed.front() == '#';
}

}  // namespace

std::vector<std::string> template_slots(std::string_view templ) {
  std::vector<std::string> slots;
  for (std::size_t i = 0; i < templ.size(); ++i) {
    if (templ[i] != '{') continue;
    const auto close = templ.find('}', i);
    if (close == std::string_view::npos) throw ArgumentError("unterminated '{' in template: " + std::string(templ));
    std::string name(templ.substr(i + 1, close - i - 1));
    if (name.empty()) throw ArgumentError("empty slot name in template: " + std::string(templ));
    if (std::find(slots.begin(), slots.end(), name) == slots.end()) slots.push_back(std::move(name));
    i = close;
  }
  return slots;
}

std::string render_template(std::string_view templ, const std::map<std::string, std::string>& slots) {
  std::string out;
  out.reserve(templ.size());
  for (std::size_t i = 0; i < templ.size(); ++i) {
    if (templ[i] != '{') {
      out += templ[i];
      continue;
    }
    const auto close = templ.find('}', i);
    if (close == std::string_view::npos) throw ArgumentError("unterminated '{' in template: " + std::string(templ));
    const std::string name(templ.substr(i + 1, close - i - 1));
    const auto it = slots.find(name);
    if (it == slots.end()) throw ArgumentError("template slot {" + name + "} has no value");
    out += it->second;
    i = close;
  }
  return out;
}

TemplateLibrary TemplateLibrary::parse(std::string_view text) {
  TemplateLibrary library;
  const auto lines = io::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (is_comment_or_blank(lines[i])) continue;
    const auto where = "templates line " + std::to_string(i + 1) + ": ";
    const auto tab = lines[i].find('\t');
    if (tab == std::string::npos) throw DataError(where + "expected task_id<TAB>template");
    const std::string task(io::trim(std::string_view(lines[i]).substr(0, tab)));
    const std::string templ(io::trim(std::string_view(lines[i]).substr(tab + 1)));
    if (task.empty() || templ.empty()) throw DataError(where + "empty task id or template");
    if (count_occurrences(templ, kMoleculeMarker) != 1) {
      throw DataError(where + "template must contain " + std::string(kMoleculeMarker) + " exactly once");
    }
    try {
      template_slots(templ);
    } catch (const ArgumentError& e) {
      throw DataError(where + e.what());
    }
    auto& set = library.sets_[task];
    set.task_id = task;
    set.templates.push_back(templ);
  }
  for (const auto& [task, set] : library.sets_) {
    if (set.templates.size() < kMinTemplates || set.templates.size() > kMaxTemplates) {
      throw DataError("template set '" + task + "' has " + std::to_string(set.templates.size()) +
                      " templates (expected 5 to 20)");
    }
  }
  return library;
}

TemplateLibrary TemplateLibrary::load(const std::string& path) {
  try {
    return parse(io::read_file(path));
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

const TemplateLibrary& TemplateLibrary::builtin() {
  static const TemplateLibrary library = parse(data::embedded("templates.tsv"));
  return library;
}

const TemplateSet& TemplateLibrary::get(std::string_view task_id) const {
  const auto it = sets_.find(task_id);
  if (it == sets_.end()) throw ArgumentError("no templates for task '" + std::string(task_id) + "'");
  return it->second;
}

bool TemplateLibrary::contains(std::string_view task_id) const { return sets_.find(task_id) != sets_.end(); }

TaskTable TaskTable::parse(std::string_view text) {
  TaskTable table;
  const auto lines = io::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (is_comment_or_blank(lines[i])) continue;
    const auto where = "tasks line " + std::to_string(i + 1) + ": ";
    const auto fields = io::split(lines[i], '\t');
    if (fields.size() != 5) throw DataError(where + "expected 5 tab-separated fields");
    TaskSpec spec;
    spec.task_id = std::string(io::trim(fields[0]));
    spec.display_name = std::string(io::trim(fields[1]));
    try {
      spec.metric = metrics::metric_from_string(fields[2]);
    } catch (const ArgumentError& e) {
      throw DataError(where + e.what());
    }
    spec.positive_label = std::string(io::trim(fields[3]));
    spec.negative_label = std::string(io::trim(fields[4]));
    if (spec.task_id.empty() || spec.positive_label.empty() || spec.negative_label.empty()) {
      throw DataError(where + "empty field");
    }
    if (io::to_lower(spec.positive_label) == io::to_lower(spec.negative_label)) {
      throw DataError(where + "positive and negative labels must differ");
    }
    const bool duplicate = std::any_of(table.tasks_.begin(), table.tasks_.end(),
                                       [&](const TaskSpec& t) { return t.task_id == spec.task_id; });
    if (duplicate) throw DataError(where + "duplicate task '" + spec.task_id + "'");
    table.tasks_.push_back(std::move(spec));
  }
  return table;
}

TaskTable TaskTable::load(const std::string& path) {
  try {
    return parse(io::read_file(path));
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

const TaskTable& TaskTable::builtin() {
  static const TaskTable table = parse(data::embedded("tasks.tsv"));
  return table;
}

const TaskSpec& TaskTable::get(std::string_view task_id) const {
  std::string known;
  for (const auto& task : tasks_) {
    if (task.task_id == task_id) return task;
    known += known.empty() ? "" : ", ";
    known += task.task_id;
  }
  throw ArgumentError("unknown task '" + std::string(task_id) + "' (known: " + known + ")");
}

std::string yn_instruction() { return "Answer with yes or no."; }
std::string count_instruction() { return "Answer with just the number."; }
std::string real_instruction() { return "Answer with just the approximate number."; }

std::string cot_instruction(const TaskSpec& task) {
  return "Reason about the molecule's structure and properties first. Put the final answer inside "
         "<answer>...</answer> tags; it must be either '" +
         task.positive_label + "' or '" + task.negative_label + "'.";
}

}  // namespace molforge::forge
