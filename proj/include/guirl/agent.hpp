#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include "guirl/episode.hpp"

namespace guirl {

enum class AgentKind { gold, noisy, lazy };

std::string_view agent_kind_name(AgentKind k);
std::optional<AgentKind> parse_agent_kind(std::string_view name);

struct NoiseRates {
  double coord = 0.3;   // jitter a pointer coordinate by up to kJitter px
  double type = 0.0;    // swap click/long_press, or send Tab instead
  double format = 0.0;  // emit a turn without its closing answer tag

  void validate() const;  // each rate in [0, 1], else ConfigError
  bool operator==(const NoiseRates&) const = default;
};

// Agent spec strings: "gold", "lazy", "noisy" or "noisy:0.3" (coordinate rate),
// "noisy:0.3:0.1:0.05" (coord:type:format).
struct AgentSpec {
  AgentKind kind = AgentKind::gold;
  NoiseRates rates;

  std::string name() const;
  static AgentSpec parse(std::string_view text);  // ConfigError on bad specs
};

// Stand-in policy that walks the template's gold actions. The noisy agent
// resumes from the episode's gold cursor, so a botched step is retried.
class ScriptedAgent {
 public:
  static constexpr int kJitter = 24;

  ScriptedAgent(AgentSpec spec, std::uint64_t seed);

  const AgentSpec& spec() const { return spec_; }
  std::string next_turn(const Episode& episode);

 private:
  double uniform();
  int jitter();

  AgentSpec spec_;
  std::mt19937_64 rng_;
};

// Gold action at the episode's cursor with element targets of pointer actions
// converted to the element's pixel center. Empty when the script is exhausted.
std::optional<Action> gold_pixel_action(const Episode& episode);

// Runs an episode to completion. The record carries agent.name().
TrajectoryRecord run_episode(const TaskTemplate& tmpl, std::uint64_t seed, const HarnessConfig& config,
                             std::shared_ptr<CritiqueProvider> provider, ScriptedAgent& agent);

}  // namespace guirl
