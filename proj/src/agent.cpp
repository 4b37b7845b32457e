#include "guirl/agent.hpp"

#include <algorithm>
#include <sstream>

#include "guirl/errors.hpp"
#include "guirl/evp.hpp"
#include "guirl/turn.hpp"
#include "guirl/util.hpp"

namespace guirl {
namespace {

bool is_pointer(ActionType t) {
  return t == ActionType::click || t == ActionType::long_press || t == ActionType::select || t == ActionType::drag;
}

double parse_rate(const std::string& s, std::string_view spec) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("agent '" + std::string(spec) + "': '" + s + "' is not a rate");
  }
}

std::string format_rate(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::string_view agent_kind_name(AgentKind k) {
  switch (k) {
    case AgentKind::gold: return "gold";
    case AgentKind::noisy: return "noisy";
    case AgentKind::lazy: return "lazy";
  }
  return "gold";
}

std::optional<AgentKind> parse_agent_kind(std::string_view name) {
  for (auto k : {AgentKind::gold, AgentKind::noisy, AgentKind::lazy}) {
    if (agent_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

void NoiseRates::validate() const {
  for (double r : {coord, type, format}) {
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("noise rates must lie in [0, 1]");
  }
}

std::string AgentSpec::name() const {
  if (kind != AgentKind::noisy) return std::string(agent_kind_name(kind));
  std::string out = "noisy:" + format_rate(rates.coord);
  if (rates.type != 0.0 || rates.format != 0.0) out += ":" + format_rate(rates.type) + ":" + format_rate(rates.format);
  return out;
}

AgentSpec AgentSpec::parse(std::string_view text) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  const auto kind = parse_agent_kind(parts[0]);
  if (!kind) throw ConfigError("unknown agent '" + std::string(text) + "' (expected gold, noisy or lazy)");
  AgentSpec spec;
  spec.kind = *kind;
  if (*kind != AgentKind::noisy) {
    if (parts.size() != 1) throw ConfigError("agent '" + parts[0] + "' takes no rates");
    spec.rates = NoiseRates{0.0, 0.0, 0.0};
    return spec;
  }
  if (parts.size() == 2) {
    spec.rates.coord = parse_rate(parts[1], text);
  } else if (parts.size() == 4) {
    spec.rates = {parse_rate(parts[1], text), parse_rate(parts[2], text), parse_rate(parts[3], text)};
  } else if (parts.size() != 1) {
    throw ConfigError("agent '" + std::string(text) + "': expected noisy, noisy:C or noisy:C:T:F");
  }
  spec.rates.validate();
  return spec;
}

ScriptedAgent::ScriptedAgent(AgentSpec spec, std::uint64_t seed)
    : spec_(spec), rng_(mix_seed(seed ^ 0x6a09e667f3bcc909ULL)) {
  spec_.rates.validate();
}

double ScriptedAgent::uniform() { return static_cast<double>(rng_() >> 11) * (1.0 / 9007199254740992.0); }

int ScriptedAgent::jitter() {
  int d = 0;
  while (d == 0) d = static_cast<int>(rng_() % (2 * kJitter + 1)) - kJitter;
  return d;
}

std::optional<Action> gold_pixel_action(const Episode& ep) {
  const auto& gold = ep.task().gold_actions;
  if (ep.gold_cursor() >= gold.size()) return std::nullopt;
  Action a = gold[ep.gold_cursor()].action;
  if (is_pointer(a.type)) {
    if (a.target) {
      if (const auto p = target_point(ep.state(), *a.target)) a.target = Target{*p};
    }
    if (a.to) {
      if (const auto p = target_point(ep.state(), *a.to)) a.to = Target{*p};
    }
  }
  return a;
}

std::string ScriptedAgent::next_turn(const Episode& ep) {
  auto action = gold_pixel_action(ep);
  const auto& gold = ep.task().gold_actions;
  if (!action) {
    // Script exhausted without finishing: idle until the budget runs out.
    Action idle;
    idle.type = ActionType::key_press;
    idle.key = "Tab";
    return render_turn("The scripted steps are done. I wait for the next screen.", idle);
  }
  const GoldStep& step = gold[ep.gold_cursor()];
  std::string think;
  if (spec_.kind != AgentKind::lazy && !step.milestone.empty()) think = "[MILESTONE: " + step.milestone + "]\n";
  think += step.reasoning.empty() ? "I follow the plan and take the next step." : step.reasoning;

  if (spec_.kind == AgentKind::noisy) {
    const bool broken = uniform() < spec_.rates.format;
    const bool swap = uniform() < spec_.rates.type;
    const bool shift = uniform() < spec_.rates.coord;
    const int dx = jitter();
    const int dy = jitter();
    if (swap) {
      if (action->type == ActionType::click) {
        action->type = ActionType::long_press;
      } else if (action->type == ActionType::long_press) {
        action->type = ActionType::click;
      } else if (!is_pointer(action->type)) {
        *action = Action{ActionType::key_press, std::nullopt, {}, std::nullopt, std::string("Tab"), std::nullopt};
      }
    }
    if (shift && action->target && std::holds_alternative<Point>(*action->target)) {
      const Point p = std::get<Point>(*action->target);
      const Viewport& vp = ep.state().viewport();
      action->target = Target{Point{std::clamp(p.x + dx, 0, vp.width - 1), std::clamp(p.y + dy, 0, vp.height - 1)}};
    }
    if (broken) {
      std::string raw = render_turn(think, *action);
      raw.erase(raw.rfind("</answer>"));
      return raw;
    }
  }
  return render_turn(think, *action);
}

TrajectoryRecord run_episode(const TaskTemplate& tmpl, std::uint64_t seed, const HarnessConfig& config,
                             std::shared_ptr<CritiqueProvider> provider, ScriptedAgent& agent) {
  Episode ep(tmpl, seed, config, std::move(provider));
  while (!ep.done()) ep.step_raw(agent.next_turn(ep));
  return ep.record(agent.spec().name());
}

}  // namespace guirl
