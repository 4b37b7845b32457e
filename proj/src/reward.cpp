#include "guirl/reward.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "guirl/errors.hpp"

namespace guirl {

void RewardConfig::validate() const {
  if (window_k < 1) throw ConfigError("window_k must be >= 1, got " + std::to_string(window_k));
  if (!(milestone_bonus > 0.0)) throw ConfigError("milestone_bonus must be positive");
  if (!(milestone_penalty < 0.0)) throw ConfigError("milestone_penalty must be negative");
  if (schedule.ldp_ramp_steps < 0) throw ConfigError("ldp_ramp_steps must be >= 0");
  if (schedule.global_step < 0) throw ConfigError("global_step must be >= 0");
  for (double w : schedule.evp_weights) {
    if (!(w >= 0.0)) throw ConfigError("evp weights must be >= 0");
  }
  for (double v : schedule.ldp_weights) {
    if (!(v >= 0.0)) throw ConfigError("ldp weights must be >= 0");
  }
}

ordered_json RewardConfig::to_json() const {
  ordered_json evp = ordered_json::object();
  for (std::size_t i = 0; i < kEvpChannels.size(); ++i) evp[std::string(channel_name(kEvpChannels[i]))] = schedule.evp_weights[i];
  ordered_json ldp = ordered_json::object();
  for (std::size_t i = 0; i < kLdpChannels.size(); ++i) ldp[std::string(channel_name(kLdpChannels[i]))] = schedule.ldp_weights[i];
  return ordered_json{{"window_k", window_k},
                      {"global_step", schedule.global_step},
                      {"ldp_ramp_steps", schedule.ldp_ramp_steps},
                      {"weights", {{"evp", std::move(evp)}, {"ldp", std::move(ldp)}}},
                      {"bonus", milestone_bonus},
                      {"penalty", milestone_penalty}};
}

RewardConfig RewardConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("config: expected an object");
  RewardConfig c;
  try {
    c.window_k = j.value("window_k", c.window_k);
    c.schedule.global_step = j.value("global_step", c.schedule.global_step);
    c.schedule.ldp_ramp_steps = j.value("ldp_ramp_steps", c.schedule.ldp_ramp_steps);
    c.milestone_bonus = j.value("bonus", c.milestone_bonus);
    c.milestone_penalty = j.value("penalty", c.milestone_penalty);
    if (j.contains("weights")) {
      const auto& w = j.at("weights");
      for (const auto& [group, channels] : {std::pair{"evp", &kEvpChannels}, std::pair{"ldp", &kLdpChannels}}) {
        if (!w.contains(group)) continue;
        auto& target = std::string_view(group) == "evp" ? c.schedule.evp_weights : c.schedule.ldp_weights;
        for (const auto& [name, value] : w.at(group).items()) {
          const auto ch = parse_channel(name);
          if (!ch || std::find(channels->begin(), channels->end(), *ch) == channels->end()) {
            throw SchemaError(std::string("config.weights.") + group + "." + name + ": unknown channel");
          }
          target[channel_slot(*ch)] = value.get<double>();
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("config: ") + e.what());
  }
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw SchemaError(std::string("config: ") + e.what());
  }
  return c;
}

double quantize_reward(double v) { return std::nearbyint(v / kRewardQuantum) * kRewardQuantum; }

std::string_view milestone_outcome_name(MilestoneOutcome o) {
  switch (o) {
    case MilestoneOutcome::credited: return "credited";
    case MilestoneOutcome::false_claim: return "false_claim";
    case MilestoneOutcome::repeated: return "repeated";
    case MilestoneOutcome::missed: return "missed";
  }
  return "credited";
}

namespace {

std::optional<MilestoneOutcome> parse_outcome(std::string_view s) {
  for (auto o : {MilestoneOutcome::credited, MilestoneOutcome::false_claim, MilestoneOutcome::repeated,
                 MilestoneOutcome::missed}) {
    if (milestone_outcome_name(o) == s) return o;
  }
  return std::nullopt;
}

}  // namespace

StepReward step_reward(const std::vector<EvpResult>& evp, const LdpScore& ldp,
                       const std::vector<MilestoneEvent>& milestone_events, const RewardConfig& config,
                       long global_step) {
  const auto& sched = config.schedule;
  const auto [evp_mult, ldp_mult] = anneal_weights(sched, global_step);

  StepReward r;
  r.evp = evp;
  r.ldp = ldp;
  r.milestone_events = milestone_events;

  double env = 0.0;
  for (const auto& e : evp) env += sched.evp_weights[channel_slot(e.channel)] * e.value;
  double critique = 0.0;
  const auto norm = normalized_ldp(ldp);
  for (std::size_t j = 0; j < norm.size(); ++j) critique += sched.ldp_weights[j] * norm[j];
  double milestone = 0.0;
  for (const auto& m : milestone_events) milestone += m.value;

  r.r_env = quantize_reward(evp_mult * env);
  r.r_critique = quantize_reward(ldp_mult * critique);
  r.r_milestone = quantize_reward(milestone);
  r.total = r.r_env + r.r_critique + r.r_milestone;
  r.windowed = r.total;
  return r;
}

std::string normalize_label(std::string_view label) {
  std::string out;
  for (unsigned char c : label) {
    if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

int match_subtask(std::string_view declared, const std::vector<SubtaskStatus>& subtasks) {
  const std::string key = normalize_label(declared);
  if (key.empty()) return -1;
  for (std::size_t i = 0; i < subtasks.size(); ++i) {
    if (normalize_label(subtasks[i].label) == key) return static_cast<int>(i);
    for (const auto& alias : subtasks[i].aliases) {
      if (normalize_label(alias) == key) return static_cast<int>(i);
    }
  }
  return -1;
}

std::vector<MilestoneEvent> milestone_reward(const std::vector<Milestone>& declared,
                                             const std::vector<SubtaskStatus>& subtasks,
                                             std::set<std::string>& credited, const RewardConfig& config) {
  std::vector<MilestoneEvent> out;
  for (const auto& m : declared) {
    MilestoneEvent ev;
    ev.label = m.label;
    const int idx = match_subtask(m.label, subtasks);
    if (idx < 0) {
      ev.outcome = MilestoneOutcome::false_claim;
      ev.value = config.milestone_penalty;
    } else {
      const auto& st = subtasks[static_cast<std::size_t>(idx)];
      ev.subtask = st.label;
      if (credited.count(st.label)) {
        ev.outcome = MilestoneOutcome::repeated;
        ev.value = 0.0;
      } else if (st.holds) {
        ev.outcome = MilestoneOutcome::credited;
        ev.value = config.milestone_bonus;
        credited.insert(st.label);
      } else {
        ev.outcome = MilestoneOutcome::false_claim;
        ev.value = config.milestone_penalty;
      }
    }
    out.push_back(std::move(ev));
  }
  return out;
}

std::vector<double> window_rewards(const std::vector<double>& step_totals, int k) {
  if (k < 1) throw ConfigError("window size must be >= 1, got " + std::to_string(k));
  std::vector<double> out(step_totals.size());
  const std::size_t w = static_cast<std::size_t>(k);
  for (std::size_t start = 0; start < step_totals.size(); start += w) {
    const std::size_t end = std::min(step_totals.size(), start + w);
    double sum = 0.0;
    for (std::size_t i = start; i < end; ++i) sum += step_totals[i];
    const double len = static_cast<double>(end - start);
    const double mean = sum / len;
    const double quanta = sum / kRewardQuantum;
    if (std::fma(mean, len, -sum) == 0.0 || quanta != std::nearbyint(quanta)) {
      for (std::size_t i = start; i < end; ++i) out[i] = mean;
      continue;
    }
    // Inexact mean of on-grid totals: spread the sum in whole quanta.
    const auto n = static_cast<long long>(quanta);
    const auto parts = static_cast<long long>(end - start);
    long long base = n / parts;
    long long rem = n % parts;
    if (rem < 0) {
      base -= 1;
      rem += parts;
    }
    for (std::size_t i = start; i < end; ++i) {
      const long long share = base + (static_cast<long long>(i - start) < rem ? 1 : 0);
      out[i] = static_cast<double>(share) * kRewardQuantum;
    }
  }
  return out;
}

double trajectory_return(const std::vector<double>& windowed_totals) {
  return std::accumulate(windowed_totals.begin(), windowed_totals.end(), 0.0);
}

double trajectory_return(const std::vector<StepReward>& steps) {
  double r = 0.0;
  for (const auto& s : steps) r += s.windowed;
  return r;
}

GroupAdvantages group_advantages(const std::vector<double>& returns, bool normalize) {
  if (returns.size() < 2) {
    throw ConfigError("a group needs at least 2 trajectories, got " + std::to_string(returns.size()));
  }
  GroupAdvantages g;
  const double n = static_cast<double>(returns.size());
  const auto [lo, hi] = std::minmax_element(returns.begin(), returns.end());
  g.baseline = *lo == *hi ? *lo : std::clamp(std::accumulate(returns.begin(), returns.end(), 0.0) / n, *lo, *hi);
  if (normalize) {
    double var = 0.0;
    for (double r : returns) var += (r - g.baseline) * (r - g.baseline);
    const double sd = std::sqrt(var / n);
    if (sd > 0.0) g.scale = sd;
  }
  g.advantages.reserve(returns.size());
  for (double r : returns) g.advantages.push_back((r - g.baseline) / g.scale);
  return g;
}

ordered_json step_reward_to_json(const StepReward& r) {
  ordered_json evp = ordered_json::array();
  for (const auto& e : r.evp) {
    evp.push_back({{"channel", channel_name(e.channel)},
                   {"value", e.value},
                   {"applicable", e.applicable},
                   {"detail", e.detail}});
  }
  ordered_json events = ordered_json::array();
  for (const auto& m : r.milestone_events) {
    events.push_back({{"label", m.label},
                      {"subtask", m.subtask},
                      {"outcome", milestone_outcome_name(m.outcome)},
                      {"value", m.value}});
  }
  return ordered_json{{"t", r.t},
                      {"evp", std::move(evp)},
                      {"ldp", ldp_to_json(r.ldp)},
                      {"ldp_failed", r.ldp_failed},
                      {"r_env", r.r_env},
                      {"r_critique", r.r_critique},
                      {"r_milestone", r.r_milestone},
                      {"milestone_events", std::move(events)},
                      {"total", r.total},
                      {"windowed", r.windowed}};
}

StepReward step_reward_from_json(const nlohmann::json& j) {
  StepReward r;
  try {
    r.t = j.at("t").get<int>();
    for (const auto& e : j.at("evp")) {
      EvpResult res;
      const auto name = e.at("channel").get<std::string>();
      const auto ch = parse_channel(name);
      if (!ch || !is_evp(*ch)) throw SchemaError("reward.evp: unknown channel '" + name + "'");
      res.channel = *ch;
      res.value = e.at("value").get<double>();
      res.applicable = e.at("applicable").get<bool>();
      res.detail = e.value("detail", "");
      r.evp.push_back(std::move(res));
    }
    r.ldp = ldp_from_json(j.at("ldp"));
    r.ldp_failed = j.at("ldp_failed").get<bool>();
    r.r_env = j.at("r_env").get<double>();
    r.r_critique = j.at("r_critique").get<double>();
    r.r_milestone = j.at("r_milestone").get<double>();
    for (const auto& m : j.at("milestone_events")) {
      MilestoneEvent ev;
      ev.label = m.at("label").get<std::string>();
      ev.subtask = m.value("subtask", "");
      const auto name = m.at("outcome").get<std::string>();
      const auto o = parse_outcome(name);
      if (!o) throw SchemaError("reward.milestone_events: unknown outcome '" + name + "'");
      ev.outcome = *o;
      ev.value = m.at("value").get<double>();
      r.milestone_events.push_back(std::move(ev));
    }
    r.total = j.at("total").get<double>();
    r.windowed = j.at("windowed").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("reward: ") + e.what());
  }
  return r;
}

}  // namespace guirl
