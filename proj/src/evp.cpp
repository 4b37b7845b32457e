#include "guirl/evp.hpp"

#include <algorithm>
#include <cstdlib>

namespace guirl {

std::optional<std::string> resolve_target(const UiTree& tree, const Target& target) {
  if (const auto* p = std::get_if<Point>(&target)) return hit_test(tree, p->x, p->y);
  const auto& id = std::get<std::string>(target);
  if (!tree.contains(id) || !is_visible_interactive(tree, id)) return std::nullopt;
  return id;
}

std::optional<Point> target_point(const UiTree& tree, const Target& target) {
  if (const auto* p = std::get_if<Point>(&target)) return *p;
  const UiNode* n = tree.find(std::get<std::string>(target));
  if (!n) return std::nullopt;
  return n->rect.center();
}

int evp_action_type(const Action& predicted, const Action& gold) { return predicted.type == gold.type ? 1 : 0; }

double evp_target_bound(Point predicted, Point gold, Viewport viewport) {
  const double dx = std::abs(static_cast<double>(predicted.x) - gold.x) / viewport.width;
  const double dy = std::abs(static_cast<double>(predicted.y) - gold.y) / viewport.height;
  const double delta = (dx + dy) / 2.0;
  return std::max(0.0, 1.0 - delta);
}

EvpResult evp_ui_transition(const UiTree& post_state, const StatePredicate& expected, const EventLog& log) {
  const auto r = expected.evaluate(post_state, log);
  EvpResult out{Channel::ui_transition, r.value ? 1.0 : 0.0, {}, true};
  out.detail = r.error.empty() ? (r.value ? "expected state reached" : "expected state not reached")
                               : "evaluation error: " + r.error;
  if (!r.error.empty()) out.value = 0.0;
  return out;
}

int evp_format_validity(const AgentTurn& turn) { return turn.format_ok ? 0 : -1; }

bool confirmation_pending(const EventLog& history) {
  bool pending = false;
  for (const auto& rec : history) {
    for (const auto& e : rec.system_events) {
      if (e == events::kConfirmAccepted) pending = true;
      if (e == events::kDestructiveDone) pending = false;
    }
  }
  return pending;
}

bool targets_destructive(const Action& action, const UiTree& state, const DestructiveSet& destructive) {
  if (!action.target) return false;
  const auto hit = resolve_target(state, *action.target);
  return hit && destructive.count(*hit) > 0;
}

int evp_safety_guard(const Action& action, const UiTree& state, const EventLog& history,
                     const DestructiveSet& destructive) {
  if (!targets_destructive(action, state, destructive)) return 0;
  return confirmation_pending(history) ? 0 : -1;
}

}  // namespace guirl
