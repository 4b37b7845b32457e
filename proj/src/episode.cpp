#include "guirl/episode.hpp"

#include <algorithm>
#include <functional>

#include "guirl/errors.hpp"
#include "guirl/util.hpp"

namespace guirl {
namespace {

const UiNode* open_dialog(const UiTree& tree) {
  const UiNode* best = nullptr;
  tree.for_each([&](const UiNode& n) {
    if (n.kind == NodeKind::dialog && n.visible && n.open && (!best || n.z >= best->z)) best = &n;
  });
  return best;
}

std::vector<std::string> visible_texts(const UiTree& tree) {
  std::vector<std::string> out;
  tree.for_each([&](const UiNode& n) {
    if (n.visible && !n.text.empty() && std::find(out.begin(), out.end(), n.text) == out.end()) out.push_back(n.text);
  });
  return out;
}

EvpResult inactive(Channel c, std::string detail) { return EvpResult{c, 0.0, std::move(detail), false}; }

ordered_json snapshot_ref(const ScreenSnapshot& s, bool include_grid) {
  ordered_json j{{"digest", s.digest}, {"step_index", s.step_index}, {"cols", s.cols}, {"rows", s.rows}};
  if (include_grid) j["grid"] = s.grid;
  return j;
}

}  // namespace

ordered_json Observation::to_json() const {
  return ordered_json{{"step_index", step_index},
                      {"prompt", prompt.render()},
                      {"screen", snapshot_ref(snapshot, false)},
                      {"screenshot_ref", snapshot.encoded()},
                      {"milestones_credited", credited},
                      {"done", done},
                      {"done_reason", done ? ordered_json(done_reason) : ordered_json(nullptr)}};
}

ordered_json StepResult::to_json() const {
  ordered_json j{{"observation", observation.to_json()},
                 {"t", step.t},
                 {"format_ok", step.format_ok},
                 {"action", step.action ? action_to_json(*step.action) : ordered_json(nullptr)},
                 {"milestones", step.milestones},
                 {"reward", step_reward_to_json(step.reward)},
                 {"event",
                  {{"step", step.event.step},
                   {"screen", snapshot_ref(step.event.screen, false)},
                   {"input", step.event.input},
                   {"system_events", step.event.system_events}}},
                 {"note", note},
                 {"done", done},
                 {"done_reason", done ? ordered_json(done_reason) : ordered_json(nullptr)}};
  if (R) {
    j["R"] = *R;
    j["windowed_totals"] = windowed_totals;
  }
  return j;
}

Episode::Episode(const TaskTemplate& tmpl, std::uint64_t seed, HarnessConfig config,
                 std::shared_ptr<CritiqueProvider> provider, std::string id)
    : tmpl_(tmpl),
      seed_(seed),
      config_(std::move(config)),
      provider_(std::move(provider)),
      id_(std::move(id)),
      app_(find_app_model(tmpl.app_model)),
      state_(app_.initial_state(seed)),
      first_true_(tmpl.subtasks.size()) {
  config_.reward.validate();
  if (!provider_) throw ConfigError("episode needs a critique provider");
}

Observation Episode::observation() const {
  Observation o;
  o.step_index = t_;
  o.snapshot = render_snapshot(state_, t_);
  o.prompt = build_step_prompt(tmpl_, o.snapshot, t_, config_.principles);
  for (const auto& s : tmpl_.subtasks) {
    if (credited_.count(s.label)) o.credited.push_back(s.label);
  }
  o.done = done_;
  o.done_reason = done_reason_;
  return o;
}

bool Episode::check_subtask(std::string_view label) const {
  return tmpl_.subtask(label).predicate.holds(state_, log_);
}

bool Episode::matches_gold(const Action& action, const UiTree& pre) const {
  if (gold_cursor_ >= tmpl_.gold_actions.size()) return false;
  const Action& g = tmpl_.gold_actions[gold_cursor_].action;
  if (action.type != g.type || action.text != g.text || action.key != g.key || action.direction != g.direction) {
    return false;
  }
  if (action.type == ActionType::scroll || action.type == ActionType::swipe) return true;
  auto same = [&](const std::optional<Target>& a, const std::optional<Target>& b) {
    if (!a || !b) return !a && !b;
    const auto ra = resolve_target(pre, *a);
    return ra && ra == resolve_target(pre, *b);
  };
  auto effective = [&](const Action& a) -> std::optional<Target> {
    if (a.target || a.type != ActionType::type || !pre.focus()) return a.target;
    return Target{*pre.focus()};
  };
  return same(effective(action), effective(g)) && (action.type != ActionType::drag || same(action.to, g.to));
}

std::vector<EvpResult> Episode::score_evp(const Action& action, const UiTree& pre, const UiTree& post,
                                          const EventLog& history, const ApplicabilityContext& ctx) const {
  const auto& P = config_.principles;
  const GoldStep* gold = gold_cursor_ < tmpl_.gold_actions.size() ? &tmpl_.gold_actions[gold_cursor_] : nullptr;
  std::vector<EvpResult> out;

  if (!P.channel_active(Channel::action_type, ctx)) {
    out.push_back(inactive(Channel::action_type, "no applicable principle"));
  } else if (!gold) {
    out.push_back(inactive(Channel::action_type, "no reference action"));
  } else {
    const int v = evp_action_type(action, gold->action);
    out.push_back({Channel::action_type, static_cast<double>(v),
                   std::string("expected ") + std::string(action_type_name(gold->action.type)), true});
  }

  if (!P.channel_active(Channel::target_bound, ctx)) {
    out.push_back(inactive(Channel::target_bound, "no applicable principle"));
  } else if (!gold || !gold->action.target) {
    out.push_back(inactive(Channel::target_bound, "reference action has no target"));
  } else {
    std::optional<Target> predicted = action.target;
    if (!predicted && action.type == ActionType::type && pre.focus()) predicted = Target{*pre.focus()};
    const auto gp = target_point(pre, *gold->action.target);
    const auto pp = predicted ? target_point(pre, *predicted) : std::nullopt;
    if (!gp) {
      out.push_back(inactive(Channel::target_bound, "reference element is absent"));
    } else if (!pp) {
      out.push_back({Channel::target_bound, 0.0, "predicted target does not exist", true});
    } else {
      const double v = evp_target_bound(*pp, *gp, pre.viewport());
      out.push_back({Channel::target_bound, v,
                     "predicted (" + std::to_string(pp->x) + "," + std::to_string(pp->y) + ") vs reference (" +
                         std::to_string(gp->x) + "," + std::to_string(gp->y) + ")",
                     true});
    }
  }

  if (!P.channel_active(Channel::ui_transition, ctx)) {
    out.push_back(inactive(Channel::ui_transition, "no applicable principle"));
  } else if (!gold) {
    out.push_back(inactive(Channel::ui_transition, "no reference transition"));
  } else {
    out.push_back(evp_ui_transition(post, gold->expect, log_));
  }

  if (!P.channel_active(Channel::format_validity, ctx)) {
    out.push_back(inactive(Channel::format_validity, "no applicable principle"));
  } else {
    out.push_back({Channel::format_validity, 0.0, "well-formed turn", true});
  }

  if (!P.channel_active(Channel::safety_guard, ctx)) {
    out.push_back(inactive(Channel::safety_guard, "no applicable principle"));
  } else {
    const int v = evp_safety_guard(action, pre, history, app_.destructive_nodes());
    out.push_back({Channel::safety_guard, static_cast<double>(v),
                   v < 0 ? "destructive action without confirmation"
                         : (ctx.targets_destructive ? "destructive action confirmed" : "not destructive"),
                   true});
  }
  return out;
}

std::vector<MilestoneEvent> Episode::settle_misses(bool final_step) {
  std::vector<MilestoneEvent> out;
  for (std::size_t i = 0; i < tmpl_.subtasks.size(); ++i) {
    const auto& label = tmpl_.subtasks[i].label;
    if (!first_true_[i] || credited_.count(label) || missed_.count(label)) continue;
    if (final_step || *first_true_[i] <= t_ - 1) {
      missed_.insert(label);
      out.push_back({label, label, MilestoneOutcome::missed, config_.reward.milestone_penalty});
    }
  }
  return out;
}

void Episode::finish(std::string reason) {
  done_ = true;
  done_reason_ = std::move(reason);
}

StepResult Episode::step(const AgentTurn& turn) {
  if (done_) throw LifecycleError("episode " + (id_.empty() ? tmpl_.id : id_) + " is finished (" + done_reason_ + ")");

  const UiTree pre = state_;
  const ScreenSnapshot pre_snapshot = render_snapshot(pre, t_);
  const EventLog history = log_;
  const DestructiveSet& destructive = app_.destructive_nodes();

  TrajectoryStep rec;
  rec.t = t_;
  rec.state_digest = pre_snapshot.digest;
  rec.raw = turn.raw;
  rec.format_ok = turn.format_ok;
  rec.reasoning = turn.think;
  for (const auto& m : turn.milestones) rec.milestones.push_back(m.label);

  std::vector<EvpResult> evp;
  std::vector<MilestoneEvent> milestone_events;
  LdpScore ldp;
  bool ldp_failed = false;
  bool crashed = false;
  std::string note;
  ApplicabilityContext ctx;

  if (!turn.format_ok) {
    rec.event = {t_, pre_snapshot, "", canonical_serialization(pre), {}};
    log_.push_back(rec.event);
    for (Channel c : kEvpChannels) {
      if (c == Channel::format_validity) {
        evp.push_back({c, -1.0, "malformed turn: " + turn.diagnostic, true});
      } else {
        evp.push_back(inactive(c, "malformed turn"));
      }
    }
    note = turn.diagnostic;
  } else {
    const Action& action = *turn.answer;
    rec.action = action;
    const UiNode* dialog = open_dialog(pre);
    ctx = ApplicabilityContext{&action, targets_destructive(action, pre, destructive), dialog != nullptr};

    Transition tr = app_.apply(pre, action);
    crashed = tr.crashed;
    note = tr.note;
    rec.event = {t_, render_snapshot(tr.next, t_), serialize_action(action), canonical_serialization(tr.next),
                 tr.events};
    log_.push_back(rec.event);
    state_ = std::move(tr.next);

    evp = score_evp(action, pre, state_, history, ctx);
    if (matches_gold(action, pre)) ++gold_cursor_;
  }

  for (std::size_t i = 0; i < tmpl_.subtasks.size(); ++i) {
    if (!first_true_[i] && tmpl_.subtasks[i].predicate.holds(state_, log_)) first_true_[i] = t_;
  }

  if (turn.format_ok) {
    std::vector<SubtaskStatus> statuses;
    for (const auto& s : tmpl_.subtasks) statuses.push_back({s.label, s.milestone_aliases, s.predicate.holds(state_, log_)});
    milestone_events = milestone_reward(turn.milestones, statuses, credited_, config_.reward);
  }

  const bool all_achieved =
      std::all_of(first_true_.begin(), first_true_.end(), [](const auto& v) { return v.has_value(); });
  if (crashed) {
    finish("crash");
  } else if (all_achieved) {
    finish("completed");
  } else if (t_ >= tmpl_.tau_star) {
    finish("budget");
  }
  for (auto& m : settle_misses(done_)) milestone_events.push_back(std::move(m));

  if (turn.format_ok) {
    const Action& action = *turn.answer;
    prefix_.push_back({pre_snapshot.digest, serialize_action(action)});
    if (action.type == ActionType::type) typed_texts_.push_back(action.text);

    CritiqueEvidence ev;
    ev.goal_keywords = tmpl_.goal_keywords;
    ev.visible_texts = visible_texts(pre);
    std::optional<std::string> hit;
    if (action.target) {
      hit = resolve_target(pre, *action.target);
    } else if (action.type == ActionType::type) {
      hit = pre.focus();
    }
    if (hit) ev.target_text = pre.at(*hit).text;
    ev.milestone_matched = std::any_of(milestone_events.begin(), milestone_events.end(),
                                       [](const MilestoneEvent& m) { return m.outcome == MilestoneOutcome::credited; });
    ev.evp_penalty = std::any_of(evp.begin(), evp.end(), [](const EvpResult& e) { return e.value < 0.0; });
    ev.targets_destructive = ctx.targets_destructive;
    ev.confirmation_pending = confirmation_pending(history);
    const UiNode* dialog = open_dialog(pre);
    ev.blocking_dialog_open = dialog != nullptr;
    ev.action_addresses_dialog =
        dialog && ((hit && pre.is_descendant_of(*hit, dialog->id)) || action.type == ActionType::key_press);
    ev.typed_texts = typed_texts_;
    ev.prefix = prefix_;
    ev.tau_star = tmpl_.tau_star;
    ev.terminal_success = done_ && done_reason_ == "completed";

    const PrincipleSet applicable = config_.principles.applicable(ctx);
    const CritiqueRequest req =
        build_critique_request(turn.think, pre_snapshot, action, applicable, tmpl_.goal, std::move(ev));
    LdpOutcome outcome = score_ldp(req, *provider_, config_.ldp_attempts);
    ldp = outcome.score;
    ldp_failed = outcome.failed;
    if (!config_.principles.channel_active(Channel::coherence, ctx)) ldp.coherence = 0.0;
    if (!config_.principles.channel_active(Channel::planning, ctx)) ldp.planning = 0.0;
    if (!config_.principles.channel_active(Channel::efficiency, ctx)) ldp.efficiency = 0.0;
    if (!config_.principles.channel_active(Channel::etiquette, ctx)) ldp.etiquette = 0;
    if (!config_.principles.channel_active(Channel::consistency, ctx)) ldp.consistency = 0;
  }

  rec.reward = step_reward(evp, ldp, milestone_events, config_.reward, config_.reward.schedule.global_step);
  rec.reward.t = t_;
  rec.reward.ldp_failed = ldp_failed;
  steps_.push_back(rec);

  StepResult out;
  out.step = rec;
  out.note = note;
  out.done = done_;
  out.done_reason = done_reason_;
  if (!done_) ++t_;
  out.observation = observation();
  if (done_) {
    const TrajectoryRecord tr = record();
    out.R = tr.R;
    for (const auto& s : tr.steps) out.windowed_totals.push_back(s.reward.windowed);
    out.step.reward.windowed = tr.steps.back().reward.windowed;
  }
  return out;
}

TrajectoryRecord Episode::record(const std::string& agent) const {
  TrajectoryRecord r;
  r.template_id = tmpl_.id;
  r.platform = std::string(platform_name(tmpl_.platform));
  r.category = tmpl_.category;
  r.agent = agent;
  r.seed = seed_;
  r.config = config_.reward;
  r.steps = steps_;
  r.T = static_cast<int>(steps_.size());
  r.done_reason = done_reason_;
  for (const auto& s : tmpl_.subtasks) {
    if (credited_.count(s.label)) r.credited.push_back(s.label);
  }
  std::vector<double> totals;
  for (const auto& s : r.steps) totals.push_back(s.reward.total);
  const auto windowed = window_rewards(totals, config_.reward.window_k);
  for (std::size_t i = 0; i < r.steps.size(); ++i) r.steps[i].reward.windowed = windowed[i];
  r.R = trajectory_return(windowed);
  return r;
}

namespace {

[[noreturn]] void mismatch(int step, const std::string& field, const std::string& detail) {
  throw ReplayMismatch(step, field, "replay diverged at step " + std::to_string(step) + " (" + field + "): " + detail);
}

}  // namespace

TrajectoryRecord rescore(const TrajectoryRecord& record, const TemplateRegistry& templates,
                         const RewardConfig& config, std::shared_ptr<CritiqueProvider> provider) {
  const TaskTemplate* tmpl = templates.find(record.template_id);
  if (!tmpl) throw LookupError("unknown template '" + record.template_id + "'");
  HarnessConfig cfg;
  cfg.reward = config;
  if (!provider) provider = std::make_shared<StubCritiqueProvider>();
  Episode ep(*tmpl, record.seed, cfg, std::move(provider));

  for (const auto& stored : record.steps) {
    if (ep.done()) mismatch(stored.t, "done", "episode finished before the stored trajectory");
    const StepResult res = ep.step_raw(stored.raw);
    const TrajectoryStep& got = res.step;
    if (got.t != stored.t) mismatch(stored.t, "t", std::to_string(got.t));
    if (got.state_digest != stored.state_digest) mismatch(stored.t, "state_digest", got.state_digest);
    if (got.format_ok != stored.format_ok) mismatch(stored.t, "format_ok", "parse result differs");
    if (got.action != stored.action) mismatch(stored.t, "action", got.action ? serialize_action(*got.action) : "null");
    if (got.reasoning != stored.reasoning) mismatch(stored.t, "reasoning", "text differs");
    if (got.milestones != stored.milestones) mismatch(stored.t, "milestones", "declared milestones differ");
    if (got.event.step != stored.event.step) mismatch(stored.t, "event.step", std::to_string(got.event.step));
    if (got.event.screen.digest != stored.event.screen.digest) mismatch(stored.t, "event.screen", got.event.screen.digest);
    if (!stored.event.screen.grid.empty() && got.event.screen.grid != stored.event.screen.grid) {
      mismatch(stored.t, "event.screen.grid", "grid differs");
    }
    if (got.event.input != stored.event.input) mismatch(stored.t, "event.input", got.event.input);
    if (got.event.dom != stored.event.dom) mismatch(stored.t, "event.dom", "DOM snapshot differs");
    if (got.event.system_events != stored.event.system_events) mismatch(stored.t, "event.system_events", "differs");
  }
  if (!ep.done()) mismatch(record.T, "done_reason", "episode did not finish");

  TrajectoryRecord out = ep.record(record.agent);
  out.id = record.id;
  return out;
}

TrajectoryRecord replay(const TrajectoryRecord& record, const TemplateRegistry& templates) {
  TrajectoryRecord out = rescore(record, templates, record.config);
  for (std::size_t i = 0; i < out.steps.size(); ++i) {
    const auto a = step_reward_to_json(out.steps[i].reward);
    const auto b = step_reward_to_json(record.steps[i].reward);
    if (a != b) {
      std::string field = "reward";
      for (const auto& [k, v] : a.items()) {
        if (!b.contains(k) || b.at(k) != v) {
          field = "reward." + k;
          break;
        }
      }
      mismatch(out.steps[i].t, field, "stored " + b.dump() + " vs replayed " + a.dump());
    }
  }
  if (out.T != record.T) mismatch(out.T, "T", std::to_string(out.T));
  if (out.done_reason != record.done_reason) mismatch(out.T, "done_reason", out.done_reason);
  if (out.R != record.R) mismatch(out.T, "R", std::to_string(out.R));
  if (out.credited != record.credited) mismatch(out.T, "credited", "credited subtasks differ");
  return out;
}

}  // namespace guirl
