#include "guirl/store.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include "guirl/errors.hpp"
#include "guirl/util.hpp"

namespace guirl {
namespace {

std::string dump_line(const ordered_json& j) {
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

struct BandAcc {
  int min = std::numeric_limits<int>::max();
  int max = 0;
  long long sum = 0;
  int n = 0;

  void add(int v) {
    min = std::min(min, v);
    max = std::max(max, v);
    sum += v;
    ++n;
  }
  StepBand band() const {
    if (n == 0) return {};
    return {min, max, static_cast<double>(sum) / n};
  }
};

ordered_json band_json(const StepBand& b) { return {{"min", b.min}, {"max", b.max}, {"avg", b.avg}}; }

}  // namespace

TrajectoryStore::TrajectoryStore(std::string path, bool include_grid)
    : path_(std::move(path)), include_grid_(include_grid) {
  std::ifstream in(path_);
  if (!in) return;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++lines_;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_object() && j.contains("id") && j["id"].is_number_integer()) {
      last_id_ = std::max(last_id_, j["id"].get<long long>());
    }
  }
}

long long TrajectoryStore::append(TrajectoryRecord record) {
  validate_trajectory(record);
  std::lock_guard lock(mu_);
  record.id = last_id_ + 1;
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw ConfigError(path_ + ": cannot open for append");
  out << dump_line(trajectory_to_json(record, include_grid_)) << '\n';
  out.flush();
  if (!out) throw ConfigError(path_ + ": write failed");
  last_id_ = record.id;
  ++lines_;
  return record.id;
}

std::size_t TrajectoryStore::line_count() const {
  std::lock_guard lock(mu_);
  return lines_;
}

std::vector<TrajectoryRecord> TrajectoryStore::load() const {
  std::lock_guard lock(mu_);
  return read_file(path_);
}

std::vector<TrajectoryRecord> TrajectoryStore::read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(path + ": cannot open file");
  std::vector<TrajectoryRecord> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(parse_trajectory_line(line));
    } catch (const SchemaError& e) {
      throw SchemaError("line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

const std::vector<std::string>& known_categories() {
  static const std::vector<std::string> cats{
      "document_editing_export", "file_system_operations", "email_client_usage", "application_settings",
      "online_form_filling",     "ecommerce",              "web_navigation_search", "social_media",
      "system_settings",         "contact_management",     "messaging",          "general_app_navigation"};
  return cats;
}

ordered_json DatasetManifest::to_json() const {
  ordered_json cats = ordered_json::object();
  for (const auto& [name, c] : categories) {
    cats[name] = {{"count", c.count}, {"action_steps", band_json(c.actions)}, {"subgoal_steps", band_json(c.subgoals)}};
  }
  ordered_json plats = ordered_json::object();
  for (const auto& [name, n] : platforms) plats[name] = n;
  ordered_json tmpls = ordered_json::object();
  for (const auto& [name, n] : templates) tmpls[name] = n;
  return ordered_json{{"total_count", total_count}, {"platforms", plats}, {"categories", cats}, {"templates", tmpls}};
}

DatasetManifest dataset_stats(const std::vector<TrajectoryRecord>& records) {
  DatasetManifest m;
  for (const char* p : {"desktop", "web", "mobile"}) m.platforms[p] = 0;
  std::map<std::string, std::pair<BandAcc, BandAcc>> acc;
  for (const auto& c : known_categories()) acc[c];
  for (const auto& r : records) {
    ++m.total_count;
    ++m.platforms[r.platform];
    ++m.templates[r.template_id];
    int subgoals = 0;
    for (const auto& s : r.steps) subgoals += static_cast<int>(s.milestones.size());
    auto& a = acc[r.category];
    a.first.add(r.T);
    a.second.add(subgoals);
  }
  for (const auto& [name, a] : acc) m.categories[name] = CategoryStats{a.first.n, a.first.band(), a.second.band()};
  return m;
}

std::string_view quality_rule_name(QualityRule r) {
  switch (r) {
    case QualityRule::completed: return "completed";
    case QualityRule::no_format_penalty: return "no_format_penalty";
    case QualityRule::no_safety_penalty: return "no_safety_penalty";
    case QualityRule::replay_verified: return "replay_verified";
  }
  return "completed";
}

std::optional<QualityRule> parse_quality_rule(std::string_view name) {
  for (auto r : {QualityRule::completed, QualityRule::no_format_penalty, QualityRule::no_safety_penalty,
                 QualityRule::replay_verified}) {
    if (quality_rule_name(r) == name) return r;
  }
  return std::nullopt;
}

namespace {

bool has_penalty(const TrajectoryRecord& r, Channel c) {
  for (const auto& s : r.steps) {
    for (const auto& e : s.reward.evp) {
      if (e.channel == c && e.value < 0.0) return true;
    }
  }
  return false;
}

bool passes(const TrajectoryRecord& r, QualityRule rule, const TemplateRegistry& templates) {
  switch (rule) {
    case QualityRule::completed: {
      const auto* t = templates.find(r.template_id);
      if (!t) return false;
      for (const auto& s : t->subtasks) {
        if (std::find(r.credited.begin(), r.credited.end(), s.label) == r.credited.end()) return false;
      }
      return true;
    }
    case QualityRule::no_format_penalty: return !has_penalty(r, Channel::format_validity);
    case QualityRule::no_safety_penalty: return !has_penalty(r, Channel::safety_guard);
    case QualityRule::replay_verified:
      try {
        replay(r, templates);
        return true;
      } catch (const Error&) {
        return false;
      }
  }
  return false;
}

}  // namespace

std::vector<TrajectoryRecord> filter_quality(const std::vector<TrajectoryRecord>& records,
                                             const std::set<QualityRule>& rules, const TemplateRegistry& templates) {
  std::vector<TrajectoryRecord> out;
  for (const auto& r : records) {
    if (std::all_of(rules.begin(), rules.end(), [&](QualityRule q) { return passes(r, q, templates); })) {
      out.push_back(r);
    }
  }
  return out;
}

std::vector<GenerationEntry> desk_preset() {
  auto noisy = [](double coord, double type, double format) {
    return AgentSpec{AgentKind::noisy, NoiseRates{coord, type, format}};
  };
  const AgentSpec gold{AgentKind::gold, NoiseRates{0.0, 0.0, 0.0}};
  const AgentSpec lazy{AgentKind::lazy, NoiseRates{0.0, 0.0, 0.0}};
  return {
      {"export_pdf", gold, 10},
      {"export_pdf", noisy(0.3, 0.1, 0.05), 15},
      {"create_folder", gold, 5},
      {"create_folder", noisy(0.2, 0.1, 0.05), 10},
      {"delete_folder", gold, 5},
      {"delete_folder", lazy, 5},
      {"delete_folder", noisy(0.2, 0.1, 0.05), 5},
      {"web_register", gold, 25},
      {"web_register", lazy, 10},
      {"web_register", noisy(0.3, 0.1, 0.05), 25},
      {"toggle_wifi", gold, 5},
      {"toggle_wifi", noisy(0.3, 0.1, 0.05), 10},
      {"send_message", gold, 10},
      {"send_message", noisy(0.3, 0.1, 0.05), 10},
  };
}

std::uint64_t episode_seed(std::uint64_t seed, const std::string& template_id, const std::string& agent, int index) {
  return mix_seed(seed ^ mix_seed(fnv1a64(template_id + "\n" + agent) + static_cast<std::uint64_t>(index)));
}

GenerationResult generate_dataset(const TemplateRegistry& templates, const std::vector<GenerationEntry>& entries,
                                  std::uint64_t seed, TrajectoryStore& store, const HarnessConfig& config,
                                  std::shared_ptr<CritiqueProvider> provider) {
  for (const auto& e : entries) {
    const auto* t = templates.find(e.template_id);
    if (!t) throw ConfigError("unknown template '" + e.template_id + "'");
    if (e.count < 0) throw ConfigError("negative count for template '" + e.template_id + "'");
    if (e.count > 0 && t->gold_actions.empty()) {
      throw ConfigError("agent '" + e.agent.name() + "' needs gold actions, template '" + e.template_id + "' has none");
    }
    e.agent.rates.validate();
  }
  if (!provider) provider = std::make_shared<StubCritiqueProvider>();

  GenerationResult out;
  std::vector<TrajectoryRecord> written;
  const std::size_t before = store.line_count();
  for (const auto& e : entries) {
    const TaskTemplate& t = templates.at(e.template_id);
    const std::string agent_name = e.agent.name();
    for (int i = 0; i < e.count; ++i) {
      const std::uint64_t s = episode_seed(seed, e.template_id, agent_name, i);
      ScriptedAgent agent(e.agent, s);
      TrajectoryRecord rec = run_episode(t, s, config, provider, agent);
      rec.id = store.append(rec);
      out.ids.push_back(rec.id);
      written.push_back(std::move(rec));
    }
  }
  out.manifest = dataset_stats(written);
  if (store.line_count() - before != static_cast<std::size_t>(out.manifest.total_count)) {
    throw Error("INTERNAL", "manifest total does not match the lines written");
  }
  return out;
}

}  // namespace guirl
