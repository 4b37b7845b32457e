#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "guirl/app_model.hpp"
#include "guirl/critique.hpp"
#include "guirl/prompt.hpp"
#include "guirl/reward.hpp"
#include "guirl/template.hpp"
#include "guirl/trajectory.hpp"
#include "guirl/turn.hpp"

namespace guirl {

struct HarnessConfig {
  RewardConfig reward;
  PrincipleSet principles = default_principles();
  bool record_grid = false;  // keep full screen grids in trajectory records
  int ldp_attempts = 3;
};

struct Observation {
  int step_index = 1;
  StepPrompt prompt;
  ScreenSnapshot snapshot;
  std::vector<std::string> credited;  // milestone flags: subtasks credited so far
  bool done = false;
  std::string done_reason;

  ordered_json to_json() const;
};

struct StepResult {
  Observation observation;
  TrajectoryStep step;
  bool done = false;
  std::string done_reason;
  std::string note;                     // app-model diagnostic for no-op actions
  std::optional<double> R;              // set once the episode is done
  std::vector<double> windowed_totals;  // set once the episode is done

  ordered_json to_json() const;
};

// One run of a task template: the scripted app, the event bus, subtask
// tracking and per-step scoring. Steps are not thread-safe; callers serialise.
class Episode {
 public:
  Episode(const TaskTemplate& tmpl, std::uint64_t seed, HarnessConfig config,
          std::shared_ptr<CritiqueProvider> provider, std::string id = {});

  const std::string& id() const { return id_; }
  const TaskTemplate& task() const { return tmpl_; }
  std::uint64_t seed() const { return seed_; }
  const HarnessConfig& config() const { return config_; }
  const UiTree& state() const { return state_; }
  int t() const { return t_; }
  bool done() const { return done_; }
  const std::string& done_reason() const { return done_reason_; }
  const EventLog& event_log() const { return log_; }
  const std::set<std::string>& credited() const { return credited_; }
  // Index of the next gold step: advances when an action matches it.
  std::size_t gold_cursor() const { return gold_cursor_; }
  const std::vector<TrajectoryStep>& steps() const { return steps_; }
  const AppModel& app() const { return app_; }

  Observation observation() const;

  // Throws LifecycleError once the episode is done.
  StepResult step(const AgentTurn& turn);
  StepResult step_raw(std::string_view raw) { return step(parse_turn(raw)); }

  // Current value of a subtask predicate. Throws LookupError for unknown labels.
  bool check_subtask(std::string_view label) const;

  // Windowed trajectory; R is final only once done.
  TrajectoryRecord record(const std::string& agent = "external") const;

 private:
  std::vector<EvpResult> score_evp(const Action& action, const UiTree& pre, const UiTree& post,
                                   const EventLog& history, const ApplicabilityContext& ctx) const;
  bool matches_gold(const Action& action, const UiTree& pre) const;
  std::vector<MilestoneEvent> settle_misses(bool final_step);
  void finish(std::string reason);

  TaskTemplate tmpl_;
  std::uint64_t seed_;
  HarnessConfig config_;
  std::shared_ptr<CritiqueProvider> provider_;
  std::string id_;
  const AppModel& app_;

  UiTree state_;
  int t_ = 1;
  bool done_ = false;
  std::string done_reason_;
  EventLog log_;
  std::set<std::string> credited_;
  std::set<std::string> missed_;
  std::vector<std::optional<int>> first_true_;
  std::size_t gold_cursor_ = 0;
  std::vector<PrefixEntry> prefix_;
  std::vector<std::string> typed_texts_;
  std::vector<TrajectoryStep> steps_;
};

// Re-executes the stored turns from the stored seed with the stub critic and
// compares state digests, actions, event records and rewards step by step.
// Throws ReplayMismatch naming the first differing step and field.
TrajectoryRecord replay(const TrajectoryRecord& record, const TemplateRegistry& templates);

// Re-executes the stored turns under `config` and returns the rescored record.
// States, actions and event records must still match; rewards may differ.
TrajectoryRecord rescore(const TrajectoryRecord& record, const TemplateRegistry& templates,
                         const RewardConfig& config, std::shared_ptr<CritiqueProvider> provider = nullptr);

}  // namespace guirl
