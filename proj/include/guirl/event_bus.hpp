#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "guirl/ui_tree.hpp"

namespace guirl {

// System events the app models emit; predicates and the safety guard read them.
namespace events {
inline constexpr std::string_view kConfirmAccepted = "confirm_accepted";
inline constexpr std::string_view kDestructiveDone = "destructive_done";
inline constexpr std::string_view kCrash = "crash";
}  // namespace events

// One record per executed step; the three streams (screen, input, DOM) are
// aligned by `step`. Screen and DOM describe the state after the input.
struct EventBusRecord {
  int step = 0;
  ScreenSnapshot screen;
  std::string input;  // canonical action JSON, or "" for a malformed turn
  std::string dom;    // canonical tree serialization
  std::vector<std::string> system_events;

  bool operator==(const EventBusRecord&) const = default;
};

using EventLog = std::vector<EventBusRecord>;

bool event_occurred(const EventLog& log, std::string_view kind);

}  // namespace guirl
