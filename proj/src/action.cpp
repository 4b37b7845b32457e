#include "guirl/action.hpp"

#include <array>
#include <cmath>

#include "guirl/errors.hpp"

namespace guirl {
namespace {

constexpr std::array<std::pair<ActionType, std::string_view>, 8> kTypeNames{{
    {ActionType::click, "click"},
    {ActionType::type, "type"},
    {ActionType::scroll, "scroll"},
    {ActionType::key_press, "key_press"},
    {ActionType::swipe, "swipe"},
    {ActionType::drag, "drag"},
    {ActionType::select, "select"},
    {ActionType::long_press, "long_press"},
}};

constexpr std::array<std::pair<Direction, std::string_view>, 4> kDirectionNames{{
    {Direction::up, "up"},
    {Direction::down, "down"},
    {Direction::left, "left"},
    {Direction::right, "right"},
}};

bool needs_target(ActionType t) {
  return t == ActionType::click || t == ActionType::long_press || t == ActionType::drag ||
         t == ActionType::select;
}

bool takes_direction(ActionType t) { return t == ActionType::scroll || t == ActionType::swipe; }

int coordinate(const nlohmann::json& v, const char* field) {
  if (!v.is_number()) throw SchemaError(std::string(field) + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d) || d != std::floor(d) || std::fabs(d) > 1e9) {
    throw SchemaError(std::string(field) + ": expected an integer pixel coordinate");
  }
  return static_cast<int>(d);
}

Target target_from_json(const nlohmann::json& v, const char* field) {
  if (v.is_string()) {
    auto id = v.get<std::string>();
    if (id.empty()) throw SchemaError(std::string(field) + ": element id must be nonempty");
    return id;
  }
  if (v.is_object()) {
    for (const auto& [k, _] : v.items()) {
      if (k != "x" && k != "y") throw SchemaError(std::string(field) + ": unexpected key '" + k + "'");
    }
    if (!v.contains("x") || !v.contains("y")) {
      throw SchemaError(std::string(field) + ": point target needs x and y");
    }
    return Point{coordinate(v.at("x"), "x"), coordinate(v.at("y"), "y")};
  }
  throw SchemaError(std::string(field) + ": expected a point object or element id");
}

ordered_json target_to_json(const Target& t) {
  if (const auto* p = std::get_if<Point>(&t)) return ordered_json{{"x", p->x}, {"y", p->y}};
  return ordered_json(std::get<std::string>(t));
}

}  // namespace

std::string_view action_type_name(ActionType t) {
  for (const auto& [k, n] : kTypeNames) {
    if (k == t) return n;
  }
  return "click";
}

std::optional<ActionType> parse_action_type(std::string_view name) {
  for (const auto& [k, n] : kTypeNames) {
    if (n == name) return k;
  }
  // The atomic-action vocabulary lists text_entry as a synonym of type.
  if (name == "text_entry") return ActionType::type;
  return std::nullopt;
}

std::string_view direction_name(Direction d) {
  for (const auto& [k, n] : kDirectionNames) {
    if (k == d) return n;
  }
  return "down";
}

std::optional<Direction> parse_direction(std::string_view name) {
  for (const auto& [k, n] : kDirectionNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

void validate_action(const Action& a) {
  const std::string type(action_type_name(a.type));
  if (a.type == ActionType::type && a.text.empty()) {
    throw SchemaError("type: text must be nonempty");
  }
  if (a.type != ActionType::type && !a.text.empty()) {
    throw SchemaError(type + ": text is only allowed on type actions");
  }
  if (needs_target(a.type) && !a.target) throw SchemaError(type + ": missing required target");
  if (a.type == ActionType::drag && !a.to) throw SchemaError("drag: missing required destination 'to'");
  if (a.type != ActionType::drag && a.to) throw SchemaError(type + ": 'to' is only allowed on drag");
  if (takes_direction(a.type) && !a.direction) throw SchemaError(type + ": missing direction");
  if (!takes_direction(a.type) && a.direction) {
    throw SchemaError(type + ": direction is only allowed on scroll/swipe");
  }
  if (a.type == ActionType::key_press && (!a.key || a.key->empty())) {
    throw SchemaError("key_press: missing key");
  }
  if (a.type != ActionType::key_press && a.key) throw SchemaError(type + ": key is only allowed on key_press");
  for (const auto* t : {&a.target, &a.to}) {
    if (*t) {
      if (const auto* id = std::get_if<std::string>(&**t); id && id->empty()) {
        throw SchemaError(type + ": element id must be nonempty");
      }
    }
  }
}

ordered_json action_to_json(const Action& a) {
  ordered_json j;
  j["type"] = action_type_name(a.type);
  if (a.target) j["target"] = target_to_json(*a.target);
  if (a.to) j["to"] = target_to_json(*a.to);
  if (a.type == ActionType::type) j["text"] = a.text;
  if (a.direction) j["direction"] = direction_name(*a.direction);
  if (a.key) j["key"] = *a.key;
  return j;
}

Action action_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("action must be a JSON object");
  for (const auto& [k, _] : j.items()) {
    if (k != "type" && k != "target" && k != "to" && k != "text" && k != "direction" &&
        k != "key" && k != "x" && k != "y") {
      throw SchemaError("unknown action field '" + k + "'");
    }
  }
  if (!j.contains("type") || !j.at("type").is_string()) throw SchemaError("type: missing or not a string");
  const auto type_name = j.at("type").get<std::string>();
  const auto type = parse_action_type(type_name);
  if (!type) throw SchemaError("type: unknown action type '" + type_name + "'");

  Action a;
  a.type = *type;
  const bool flat = j.contains("x") || j.contains("y");
  if (flat) {
    if (j.contains("target")) throw SchemaError("target: both flat x/y and target given");
    if (!j.contains("x") || !j.contains("y")) throw SchemaError("target: flat form needs both x and y");
    a.target = Point{coordinate(j.at("x"), "x"), coordinate(j.at("y"), "y")};
  } else if (j.contains("target") && !j.at("target").is_null()) {
    a.target = target_from_json(j.at("target"), "target");
  }
  if (j.contains("to") && !j.at("to").is_null()) a.to = target_from_json(j.at("to"), "to");
  if (j.contains("text") && !j.at("text").is_null()) {
    if (!j.at("text").is_string()) throw SchemaError("text: expected a string");
    a.text = j.at("text").get<std::string>();
  }
  if (j.contains("direction") && !j.at("direction").is_null()) {
    if (!j.at("direction").is_string()) throw SchemaError("direction: expected a string");
    const auto d = parse_direction(j.at("direction").get<std::string>());
    if (!d) throw SchemaError("direction: unknown value");
    a.direction = d;
  }
  if (j.contains("key") && !j.at("key").is_null()) {
    if (!j.at("key").is_string()) throw SchemaError("key: expected a string");
    a.key = j.at("key").get<std::string>();
  }
  validate_action(a);
  return a;
}

std::string serialize_action(const Action& a) {
  validate_action(a);
  return action_to_json(a).dump();
}

Action deserialize_action(std::string_view text) {
  nlohmann::json j = nlohmann::json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded()) throw SchemaError("action is not valid JSON");
  return action_from_json(j);
}

}  // namespace guirl
