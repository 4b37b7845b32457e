#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "guirl/action.hpp"

namespace guirl {

// A self-labeled sub-goal token `[MILESTONE: <label>]` found in reasoning text.
struct Milestone {
  std::string label;
  std::size_t position = 0;  // offset of '[' within the reasoning text

  bool operator==(const Milestone&) const = default;
};

struct AgentTurn {
  std::string think;
  std::vector<Milestone> milestones;
  std::optional<Action> answer;  // set iff format_ok
  std::string raw;
  bool format_ok = false;
  std::string diagnostic;  // why format_ok is false; empty otherwise
};

// All non-overlapping `[MILESTONE: ...]` tokens in text order. The label runs
// up to the first `]` and may not span a newline; surrounding whitespace is
// trimmed and empty labels are dropped.
std::vector<Milestone> extract_milestones(std::string_view think);

// Never throws. Malformed input yields format_ok = false plus a diagnostic.
AgentTurn parse_turn(std::string_view raw);

// Renders a well-formed turn body; the reasoning is embedded verbatim.
std::string render_turn(std::string_view think, const Action& action);

}  // namespace guirl
