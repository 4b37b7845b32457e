#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "guirl/action.hpp"
#include "guirl/predicate.hpp"

namespace guirl {

enum class Platform { desktop, web, mobile };

std::string_view platform_name(Platform p);
std::optional<Platform> parse_platform(std::string_view name);

struct Subtask {
  std::string label;
  StatePredicate predicate;
  std::vector<std::string> milestone_aliases;
};

// One scripted reference step. `expect` is the state the step should produce
// (the ui_transition reference); `milestone` is declared by the gold agent.
struct GoldStep {
  Action action;
  StatePredicate expect;
  std::string milestone;
  std::string reasoning;
};

struct TaskTemplate {
  std::string id;
  Platform platform = Platform::desktop;
  std::string category;
  std::string goal;
  std::vector<std::string> goal_keywords;
  std::string app_model;
  int tau_star = 1;
  std::vector<std::string> prompt_principles;  // ids shown in the step prompt; empty = all human
  std::vector<Subtask> subtasks;
  std::vector<GoldStep> gold_actions;

  // Throws LookupError for an unknown label.
  const Subtask& subtask(std::string_view label) const;
  ordered_json to_json() const;
};

// `origin` prefixes error locations, e.g. "export_pdf.json: subtasks[1].predicate".
// Throws LoadError on any violation: unknown app model, empty subtasks,
// tau_star below the subtask count, malformed predicates or actions.
TaskTemplate load_template(const nlohmann::json& body, std::string_view origin = "template");
TaskTemplate load_template_file(const std::string& path);

class TemplateRegistry {
 public:
  TemplateRegistry() = default;
  explicit TemplateRegistry(std::vector<TaskTemplate> templates);
  // Loads every *.json file in `dir`, sorted by file name.
  static TemplateRegistry load_dir(const std::string& dir);

  const TaskTemplate* find(std::string_view id) const;
  // Throws LookupError.
  const TaskTemplate& at(std::string_view id) const;
  const std::vector<TaskTemplate>& all() const { return templates_; }
  std::vector<std::string> ids() const;

 private:
  std::vector<TaskTemplate> templates_;
};

// Directory holding the shipped templates: $GUIRL_TEMPLATES_DIR, or the
// data/templates directory of the source tree.
std::string default_template_dir();
// Principle catalog: $GUIRL_PRINCIPLES_FILE, or data/principles.json.
std::string default_principles_file();
const TemplateRegistry& builtin_templates();

}  // namespace guirl
