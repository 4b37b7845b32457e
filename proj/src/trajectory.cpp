#include "guirl/trajectory.hpp"

#include <cmath>

#include "guirl/errors.hpp"

namespace guirl {
namespace {

using json = nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& what) { throw SchemaError(path + ": " + what); }

const json& need(const json& obj, const std::string& path, const char* key) {
  if (!obj.is_object()) bad(path.empty() ? "(root)" : path, "expected an object");
  if (!obj.contains(key)) bad(path.empty() ? key : path + "." + key, "missing");
  return obj.at(key);
}

std::string join(const std::string& path, const char* key) { return path.empty() ? key : path + "." + key; }

std::string str(const json& obj, const std::string& path, const char* key) {
  const auto& v = need(obj, path, key);
  if (!v.is_string()) bad(join(path, key), "expected a string");
  return v.get<std::string>();
}

long long integer(const json& obj, const std::string& path, const char* key) {
  const auto& v = need(obj, path, key);
  if (!v.is_number_integer()) bad(join(path, key), "expected an integer");
  return v.get<long long>();
}

double number(const json& obj, const std::string& path, const char* key) {
  const auto& v = need(obj, path, key);
  if (!v.is_number()) bad(join(path, key), "expected a number");
  return v.get<double>();
}

bool boolean(const json& obj, const std::string& path, const char* key) {
  const auto& v = need(obj, path, key);
  if (!v.is_boolean()) bad(join(path, key), "expected a boolean");
  return v.get<bool>();
}

std::vector<std::string> strings(const json& obj, const std::string& path, const char* key) {
  const auto& v = need(obj, path, key);
  const std::string p = join(path, key);
  if (!v.is_array()) bad(p, "expected an array");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) bad(p + "[" + std::to_string(i) + "]", "expected a string");
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

// Rethrows nested parse errors with the field path in front.
template <typename F>
auto at_path(const std::string& path, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const SchemaError& e) {
    throw SchemaError(path + ": " + e.what());
  } catch (const json::exception& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

ordered_json event_to_json(const EventBusRecord& e, bool include_grid) {
  ordered_json screen{{"digest", e.screen.digest}, {"cols", e.screen.cols}, {"rows", e.screen.rows}};
  if (include_grid) screen["grid"] = e.screen.grid;
  return ordered_json{{"step", e.step},
                      {"screen", std::move(screen)},
                      {"input", e.input},
                      {"dom", e.dom},
                      {"system_events", e.system_events}};
}

EventBusRecord event_from_json(const json& j, const std::string& path) {
  EventBusRecord e;
  e.step = static_cast<int>(integer(j, path, "step"));
  const auto& screen = need(j, path, "screen");
  const std::string sp = path + ".screen";
  e.screen.digest = str(screen, sp, "digest");
  e.screen.cols = static_cast<int>(integer(screen, sp, "cols"));
  e.screen.rows = static_cast<int>(integer(screen, sp, "rows"));
  e.screen.step_index = e.step;
  if (screen.contains("grid")) e.screen.grid = strings(screen, sp, "grid");
  e.input = str(j, path, "input");
  e.dom = str(j, path, "dom");
  e.system_events = strings(j, path, "system_events");
  return e;
}

}  // namespace

ordered_json trajectory_to_json(const TrajectoryRecord& r, bool include_grid) {
  ordered_json steps = ordered_json::array();
  for (const auto& s : r.steps) {
    steps.push_back(ordered_json{{"t", s.t},
                                 {"state_digest", s.state_digest},
                                 {"raw", s.raw},
                                 {"format_ok", s.format_ok},
                                 {"action", s.action ? action_to_json(*s.action) : ordered_json(nullptr)},
                                 {"reasoning", s.reasoning},
                                 {"milestones", s.milestones},
                                 {"reward", step_reward_to_json(s.reward)},
                                 {"event", event_to_json(s.event, include_grid)}});
  }
  return ordered_json{{"schema_version", kTrajectorySchemaVersion},
                      {"id", r.id},
                      {"template_id", r.template_id},
                      {"platform", r.platform},
                      {"category", r.category},
                      {"agent", r.agent},
                      {"seed", r.seed},
                      {"config", r.config.to_json()},
                      {"steps", std::move(steps)},
                      {"T", r.T},
                      {"R", r.R},
                      {"done_reason", r.done_reason},
                      {"credited", r.credited}};
}

TrajectoryRecord trajectory_from_json(const json& j) {
  if (!j.is_object()) bad("(root)", "expected an object");
  const long long version = integer(j, "", "schema_version");
  if (version != kTrajectorySchemaVersion) {
    bad("schema_version", "unsupported version " + std::to_string(version));
  }
  TrajectoryRecord r;
  r.id = integer(j, "", "id");
  r.template_id = str(j, "", "template_id");
  r.platform = str(j, "", "platform");
  r.category = str(j, "", "category");
  r.agent = str(j, "", "agent");
  const auto& seed = need(j, "", "seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
    bad("seed", "expected a non-negative integer");
  }
  r.seed = seed.get<std::uint64_t>();
  r.config = at_path("config", [&] { return RewardConfig::from_json(need(j, "", "config")); });

  const auto& steps = need(j, "", "steps");
  if (!steps.is_array()) bad("steps", "expected an array");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const std::string p = "steps[" + std::to_string(i) + "]";
    const auto& sj = steps[i];
    TrajectoryStep s;
    s.t = static_cast<int>(integer(sj, p, "t"));
    s.state_digest = str(sj, p, "state_digest");
    s.raw = str(sj, p, "raw");
    s.format_ok = boolean(sj, p, "format_ok");
    const auto& a = need(sj, p, "action");
    if (!a.is_null()) s.action = at_path(p + ".action", [&] { return action_from_json(a); });
    if (s.format_ok != s.action.has_value()) bad(p + ".action", "must be present exactly when format_ok is true");
    s.reasoning = str(sj, p, "reasoning");
    s.milestones = strings(sj, p, "milestones");
    s.reward = at_path(p + ".reward", [&] { return step_reward_from_json(need(sj, p, "reward")); });
    s.event = event_from_json(need(sj, p, "event"), p + ".event");
    r.steps.push_back(std::move(s));
  }
  r.T = static_cast<int>(integer(j, "", "T"));
  r.R = number(j, "", "R");
  r.done_reason = str(j, "", "done_reason");
  r.credited = strings(j, "", "credited");
  return r;
}

TrajectoryRecord parse_trajectory_line(std::string_view line) {
  const auto j = json::parse(line, nullptr, false);
  if (j.is_discarded()) throw SchemaError("(root): not valid JSON");
  return trajectory_from_json(j);
}

void validate_trajectory(const TrajectoryRecord& r) {
  if (r.T != static_cast<int>(r.steps.size())) bad("T", "does not match the number of steps");
  if (r.done_reason != "completed" && r.done_reason != "budget" && r.done_reason != "crash") {
    bad("done_reason", "expected completed, budget or crash");
  }
  r.config.validate();
  std::vector<double> totals;
  for (std::size_t i = 0; i < r.steps.size(); ++i) {
    const auto& s = r.steps[i];
    const std::string p = "steps[" + std::to_string(i) + "]";
    if (s.t != static_cast<int>(i) + 1) bad(p + ".t", "steps must be numbered 1..T");
    if (s.reward.t != s.t) bad(p + ".reward.t", "does not match the step index");
    if (s.event.step != s.t) bad(p + ".event.step", "does not match the step index");
    const double sum = s.reward.r_env + s.reward.r_critique + s.reward.r_milestone;
    if (sum != s.reward.total) bad(p + ".reward.total", "is not the sum of its parts");
    if (!std::isfinite(s.reward.total)) bad(p + ".reward.total", "not finite");
    totals.push_back(s.reward.total);
  }
  const auto windowed = window_rewards(totals, r.config.window_k);
  for (std::size_t i = 0; i < r.steps.size(); ++i) {
    if (r.steps[i].reward.windowed != windowed[i]) {
      bad("steps[" + std::to_string(i) + "].reward.windowed", "does not match the configured window");
    }
  }
  if (trajectory_return(windowed) != r.R) bad("R", "is not the sum of the windowed rewards");
}

}  // namespace guirl
