#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "guirl/ui_tree.hpp"

namespace guirl {

enum class ActionType { click, type, scroll, key_press, swipe, drag, select, long_press };
enum class Direction { up, down, left, right };

std::string_view action_type_name(ActionType t);
std::optional<ActionType> parse_action_type(std::string_view name);
std::string_view direction_name(Direction d);
std::optional<Direction> parse_direction(std::string_view name);

// Either an absolute pixel position or an element id.
using Target = std::variant<Point, std::string>;

struct Action {
  ActionType type = ActionType::click;
  std::optional<Target> target;
  std::string text;                      // nonempty only for `type`
  std::optional<Direction> direction;    // scroll / swipe
  std::optional<std::string> key;        // key_press
  std::optional<Target> to;              // drag destination

  bool operator==(const Action&) const = default;
};

// Throws SchemaError describing the first violated rule.
void validate_action(const Action& action);

ordered_json action_to_json(const Action& action);
// Accepts the nested target form ({"target":{"x":..,"y":..}}), the flat form
// ({"x":..,"y":..}) and element-id targets ({"target":"node_id"}).
Action action_from_json(const nlohmann::json& j);

// Canonical compact encoding: always the nested target form.
std::string serialize_action(const Action& action);
Action deserialize_action(std::string_view text);

}  // namespace guirl
