#pragma once

#include <set>
#include <string>
#include <vector>

#include "guirl/critique.hpp"
#include "guirl/evp.hpp"
#include "guirl/turn.hpp"

namespace guirl {

struct RewardConfig {
  int window_k = 4;
  double milestone_bonus = 0.5;
  double milestone_penalty = -0.5;
  AnnealSchedule schedule;

  // Throws ConfigError.
  void validate() const;
  ordered_json to_json() const;
  static RewardConfig from_json(const nlohmann::json& j);
};

// Rewards are snapped to a 2^-20 grid so that sums, reorderings and
// power-of-two window means stay exact in double precision.
inline constexpr double kRewardQuantum = 1.0 / 1048576.0;
double quantize_reward(double v);

enum class MilestoneOutcome { credited, false_claim, repeated, missed };

std::string_view milestone_outcome_name(MilestoneOutcome o);

struct MilestoneEvent {
  std::string label;    // declared label, or subtask label for `missed`
  std::string subtask;  // matched subtask label; empty for unknown claims
  MilestoneOutcome outcome = MilestoneOutcome::credited;
  double value = 0.0;

  bool operator==(const MilestoneEvent&) const = default;
};

struct StepReward {
  int t = 0;
  std::vector<EvpResult> evp;
  LdpScore ldp;
  bool ldp_failed = false;
  double r_env = 0.0;
  double r_critique = 0.0;
  double r_milestone = 0.0;
  std::vector<MilestoneEvent> milestone_events;
  double total = 0.0;
  double windowed = 0.0;  // total after window assignment
};

// r_env = Σ w_i·evp_i; r_critique = ldp_multiplier(global_step)·Σ v_j·normalized ldp_j;
// r_milestone = Σ event values; total = r_env + r_critique + r_milestone.
StepReward step_reward(const std::vector<EvpResult>& evp, const LdpScore& ldp,
                       const std::vector<MilestoneEvent>& milestone_events, const RewardConfig& config,
                       long global_step);

// Lowercase alphanumerics only; used to match declared labels to subtasks.
std::string normalize_label(std::string_view label);

struct SubtaskStatus {
  std::string label;
  std::vector<std::string> aliases;
  bool holds = false;  // predicate value on the post-state
};

// Scores each declaration in order. A declaration naming an uncredited subtask
// whose predicate holds earns the bonus and enters `credited`; naming a subtask
// already credited earns 0; anything else is a false claim.
std::vector<MilestoneEvent> milestone_reward(const std::vector<Milestone>& declared,
                                             const std::vector<SubtaskStatus>& subtasks,
                                             std::set<std::string>& credited, const RewardConfig& config);

// Index of the subtask a declared label refers to, or -1.
int match_subtask(std::string_view declared, const std::vector<SubtaskStatus>& subtasks);

// Non-overlapping windows of size k (last may be shorter); each step takes its
// window's mean. When totals sit on the kRewardQuantum grid and the mean is not
// exact, the window sum is split into whole quanta (the first steps take the
// remainder), so window sums are preserved bit-exactly. Throws ConfigError for k < 1.
std::vector<double> window_rewards(const std::vector<double>& step_totals, int k);

double trajectory_return(const std::vector<double>& windowed_totals);
double trajectory_return(const std::vector<StepReward>& steps);

struct GroupAdvantages {
  double baseline = 0.0;
  double scale = 1.0;  // divisor applied to each advantage (1 unless normalised)
  std::vector<double> advantages;
};

// baseline = mean(returns); advantages[i] = (returns[i] − baseline) / scale where
// scale = 1, or the population standard deviation when `normalize` is set
// (falling back to 1 for a zero-variance group). Throws ConfigError below two returns.
GroupAdvantages group_advantages(const std::vector<double>& returns, bool normalize = false);

ordered_json step_reward_to_json(const StepReward& r);
StepReward step_reward_from_json(const nlohmann::json& j);

}  // namespace guirl
