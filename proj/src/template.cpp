#include "guirl/template.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include "guirl/app_model.hpp"
#include "guirl/errors.hpp"
#include "guirl/reward.hpp"

namespace guirl {
namespace {

constexpr std::array<std::string_view, 10> kTemplateKeys{"id",        "platform",          "category",
                                                         "goal",      "goal_keywords",     "app_model",
                                                         "tau_star",  "prompt_principles", "subtasks",
                                                         "gold_actions"};

class Loader {
 public:
  explicit Loader(std::string_view origin) : origin_(origin) {}

  [[noreturn]] void fail(const std::string& where, const std::string& what) const {
    throw LoadError(origin_ + ": " + where + ": " + what);
  }

  const nlohmann::json& field(const nlohmann::json& obj, const std::string& where, const char* key) const {
    if (!obj.contains(key)) fail(where.empty() ? key : where + "." + key, "missing");
    return obj.at(key);
  }

  std::string string_at(const nlohmann::json& obj, const std::string& where, const char* key,
                        bool allow_empty = false) const {
    const auto& v = field(obj, where, key);
    const std::string path = where.empty() ? key : where + "." + key;
    if (!v.is_string()) fail(path, "expected a string");
    auto s = v.get<std::string>();
    if (s.empty() && !allow_empty) fail(path, "must not be empty");
    return s;
  }

  std::vector<std::string> strings_at(const nlohmann::json& obj, const std::string& path, const char* key) const {
    std::vector<std::string> out;
    if (!obj.contains(key)) return out;
    const auto& arr = obj.at(key);
    if (!arr.is_array()) fail(path, "expected an array of strings");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (!arr[i].is_string() || arr[i].get<std::string>().empty()) {
        fail(path + "[" + std::to_string(i) + "]", "expected a nonempty string");
      }
      out.push_back(arr[i].get<std::string>());
    }
    return out;
  }

  StatePredicate predicate(const nlohmann::json& v, const std::string& path) const {
    if (!v.is_string()) fail(path, "expected a predicate string");
    try {
      return StatePredicate::parse(v.get<std::string>());
    } catch (const SchemaError& e) {
      fail(path, e.what());
    }
  }

 private:
  std::string origin_;
};

}  // namespace

std::string_view platform_name(Platform p) {
  switch (p) {
    case Platform::desktop: return "desktop";
    case Platform::web: return "web";
    case Platform::mobile: return "mobile";
  }
  return "desktop";
}

std::optional<Platform> parse_platform(std::string_view name) {
  for (auto p : {Platform::desktop, Platform::web, Platform::mobile}) {
    if (platform_name(p) == name) return p;
  }
  return std::nullopt;
}

const Subtask& TaskTemplate::subtask(std::string_view label) const {
  for (const auto& s : subtasks) {
    if (s.label == label) return s;
  }
  throw LookupError("template '" + id + "' has no subtask '" + std::string(label) + "'");
}

ordered_json TaskTemplate::to_json() const {
  ordered_json subs = ordered_json::array();
  for (const auto& s : subtasks) {
    subs.push_back({{"label", s.label}, {"predicate", s.predicate.source()}, {"milestone_aliases", s.milestone_aliases}});
  }
  ordered_json gold = ordered_json::array();
  for (const auto& g : gold_actions) {
    ordered_json step{{"action", action_to_json(g.action)}, {"expect", g.expect.source()}};
    if (!g.milestone.empty()) step["milestone"] = g.milestone;
    if (!g.reasoning.empty()) step["reasoning"] = g.reasoning;
    gold.push_back(std::move(step));
  }
  return ordered_json{{"id", id},
                      {"platform", platform_name(platform)},
                      {"category", category},
                      {"goal", goal},
                      {"goal_keywords", goal_keywords},
                      {"app_model", app_model},
                      {"tau_star", tau_star},
                      {"prompt_principles", prompt_principles},
                      {"subtasks", std::move(subs)},
                      {"gold_actions", std::move(gold)}};
}

TaskTemplate load_template(const nlohmann::json& body, std::string_view origin) {
  const Loader ld(origin);
  if (!body.is_object()) ld.fail("(root)", "expected an object");
  for (const auto& [key, _] : body.items()) {
    if (std::find(kTemplateKeys.begin(), kTemplateKeys.end(), key) == kTemplateKeys.end()) {
      ld.fail(key, "unknown field");
    }
  }

  TaskTemplate t;
  t.id = ld.string_at(body, "", "id");
  const std::string platform = ld.string_at(body, "", "platform");
  const auto p = parse_platform(platform);
  if (!p) ld.fail("platform", "unknown platform '" + platform + "'");
  t.platform = *p;
  t.category = ld.string_at(body, "", "category");
  t.goal = ld.string_at(body, "", "goal");
  t.goal_keywords = ld.strings_at(body, "goal_keywords", "goal_keywords");
  t.app_model = ld.string_at(body, "", "app_model");
  if (!has_app_model(t.app_model)) ld.fail("app_model", "unknown app model '" + t.app_model + "'");
  const auto& tau = ld.field(body, "", "tau_star");
  if (!tau.is_number_integer() || tau.get<long long>() < 1) ld.fail("tau_star", "expected an integer >= 1");
  t.tau_star = tau.get<int>();
  t.prompt_principles = ld.strings_at(body, "prompt_principles", "prompt_principles");

  const auto& subs = ld.field(body, "", "subtasks");
  if (!subs.is_array()) ld.fail("subtasks", "expected an array");
  if (subs.empty()) ld.fail("subtasks", "a template needs at least one subtask");
  std::set<std::string> labels;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    const std::string path = "subtasks[" + std::to_string(i) + "]";
    if (!subs[i].is_object()) ld.fail(path, "expected an object");
    Subtask s;
    s.label = ld.string_at(subs[i], path, "label");
    if (!labels.insert(normalize_label(s.label)).second) ld.fail(path + ".label", "duplicate label '" + s.label + "'");
    s.predicate = ld.predicate(ld.field(subs[i], path, "predicate"), path + ".predicate");
    s.milestone_aliases = ld.strings_at(subs[i], path + ".milestone_aliases", "milestone_aliases");
    t.subtasks.push_back(std::move(s));
  }
  if (t.tau_star < static_cast<int>(t.subtasks.size())) {
    ld.fail("tau_star", "budget " + std::to_string(t.tau_star) + " is below the subtask count " +
                            std::to_string(t.subtasks.size()));
  }

  if (body.contains("gold_actions")) {
    const auto& gold = body.at("gold_actions");
    if (!gold.is_array()) ld.fail("gold_actions", "expected an array");
    if (static_cast<int>(gold.size()) > t.tau_star) ld.fail("gold_actions", "longer than tau_star");
    std::vector<SubtaskStatus> names;
    for (const auto& s : t.subtasks) names.push_back({s.label, s.milestone_aliases, false});
    for (std::size_t i = 0; i < gold.size(); ++i) {
      const std::string path = "gold_actions[" + std::to_string(i) + "]";
      if (!gold[i].is_object()) ld.fail(path, "expected an object");
      GoldStep g;
      try {
        g.action = action_from_json(ld.field(gold[i], path, "action"));
      } catch (const SchemaError& e) {
        ld.fail(path + ".action", e.what());
      }
      g.expect = ld.predicate(ld.field(gold[i], path, "expect"), path + ".expect");
      if (gold[i].contains("milestone")) {
        g.milestone = ld.string_at(gold[i], path, "milestone");
        if (match_subtask(g.milestone, names) < 0) {
          ld.fail(path + ".milestone", "'" + g.milestone + "' names no subtask");
        }
      }
      if (gold[i].contains("reasoning")) g.reasoning = ld.string_at(gold[i], path, "reasoning");
      t.gold_actions.push_back(std::move(g));
    }
  }
  return t;
}

TaskTemplate load_template_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path + ": cannot open file");
  const auto body = nlohmann::json::parse(in, nullptr, false);
  if (body.is_discarded()) throw LoadError(path + ": not valid JSON");
  return load_template(body, std::filesystem::path(path).filename().string());
}

TemplateRegistry::TemplateRegistry(std::vector<TaskTemplate> templates) : templates_(std::move(templates)) {
  std::set<std::string> seen;
  for (const auto& t : templates_) {
    if (!seen.insert(t.id).second) throw LoadError("duplicate template id '" + t.id + "'");
  }
}

TemplateRegistry TemplateRegistry::load_dir(const std::string& dir) {
  std::vector<std::filesystem::path> files;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  if (ec) throw LoadError(dir + ": cannot list directory: " + ec.message());
  std::sort(files.begin(), files.end());
  std::vector<TaskTemplate> out;
  for (const auto& f : files) out.push_back(load_template_file(f.string()));
  return TemplateRegistry(std::move(out));
}

const TaskTemplate* TemplateRegistry::find(std::string_view id) const {
  for (const auto& t : templates_) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

const TaskTemplate& TemplateRegistry::at(std::string_view id) const {
  if (const auto* t = find(id)) return *t;
  throw LookupError("unknown template '" + std::string(id) + "'");
}

std::vector<std::string> TemplateRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& t : templates_) out.push_back(t.id);
  return out;
}

std::string default_template_dir() {
  if (const char* env = std::getenv("GUIRL_TEMPLATES_DIR"); env && *env) return env;
  return std::string(GUIRL_DATA_DIR) + "/templates";
}

std::string default_principles_file() {
  if (const char* env = std::getenv("GUIRL_PRINCIPLES_FILE"); env && *env) return env;
  return std::string(GUIRL_DATA_DIR) + "/principles.json";
}

const TemplateRegistry& builtin_templates() {
  static const TemplateRegistry registry = TemplateRegistry::load_dir(default_template_dir());
  return registry;
}

}  // namespace guirl
