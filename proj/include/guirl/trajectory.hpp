#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "guirl/action.hpp"
#include "guirl/event_bus.hpp"
#include "guirl/reward.hpp"

namespace guirl {

inline constexpr int kTrajectorySchemaVersion = 1;

struct TrajectoryStep {
  int t = 0;
  std::string state_digest;  // digest of s_t, the state the action was chosen in
  std::string raw;           // the agent's turn, verbatim
  bool format_ok = false;
  std::optional<Action> action;
  std::string reasoning;
  std::vector<std::string> milestones;
  StepReward reward;
  EventBusRecord event;
};

struct TrajectoryRecord {
  long long id = 0;  // assigned by the store
  std::string template_id;
  std::string platform;
  std::string category;
  std::string agent;
  std::uint64_t seed = 0;
  RewardConfig config;
  std::vector<TrajectoryStep> steps;
  int T = 0;
  double R = 0.0;
  std::string done_reason;  // completed | budget | crash
  std::vector<std::string> credited;

  bool completed() const { return done_reason == "completed"; }
};

// One JSON line. Screen grids are written only when `include_grid` is set.
ordered_json trajectory_to_json(const TrajectoryRecord& record, bool include_grid = false);
// Throws SchemaError naming the offending field path, e.g. "steps[2].t".
TrajectoryRecord trajectory_from_json(const nlohmann::json& j);
TrajectoryRecord parse_trajectory_line(std::string_view line);

// Structural checks beyond the JSON shape: steps ordered 1..T, T = steps.size(),
// totals equal their parts, windowed values match the configured window and
// R equals their sum. Throws SchemaError with a field path.
void validate_trajectory(const TrajectoryRecord& record);

}  // namespace guirl
