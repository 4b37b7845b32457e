#pragma once

#include <optional>
#include <set>
#include <string>

#include "guirl/action.hpp"
#include "guirl/event_bus.hpp"
#include "guirl/predicate.hpp"
#include "guirl/principles.hpp"
#include "guirl/turn.hpp"
#include "guirl/ui_tree.hpp"

namespace guirl {

struct EvpResult {
  Channel channel = Channel::action_type;
  double value = 0.0;
  std::string detail;
  bool applicable = true;  // false: no applicable principle or no reference; value is 0

  bool operator==(const EvpResult&) const = default;
};

using DestructiveSet = std::set<std::string, std::less<>>;

// Node the action lands on: hit test for pixel targets; element targets must
// exist and be visible + interactive. nullopt when the action has no target.
std::optional<std::string> resolve_target(const UiTree& tree, const Target& target);
// Pixel position of a target: the point itself, or the centre of the element.
std::optional<Point> target_point(const UiTree& tree, const Target& target);

// 1 iff the primitive operation matches the reference.
int evp_action_type(const Action& predicted, const Action& gold);

// r = max(0, 1 - δ), δ = (|Δx| / width + |Δy| / height) / 2.
double evp_target_bound(Point predicted, Point gold, Viewport viewport);

// 1 iff `expected` holds after the action; a missing node scores 0 with detail.
EvpResult evp_ui_transition(const UiTree& post_state, const StatePredicate& expected,
                            const EventLog& log);

// -1 for a malformed turn, else 0.
int evp_format_validity(const AgentTurn& turn);

// True when a confirm_accepted event follows the most recent destructive_done
// in `history`; each confirmation authorises one destructive action.
bool confirmation_pending(const EventLog& history);
bool targets_destructive(const Action& action, const UiTree& state, const DestructiveSet& destructive);
// -1 iff the action hits a destructive node without a pending confirmation.
int evp_safety_guard(const Action& action, const UiTree& state, const EventLog& history,
                     const DestructiveSet& destructive);

}  // namespace guirl
