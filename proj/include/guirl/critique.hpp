#pragma once

#include <array>
#include <chrono>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "guirl/action.hpp"
#include "guirl/principles.hpp"
#include "guirl/ui_tree.hpp"

namespace guirl {

// Scores of the five critique-derived channels, each within its channel range.
struct LdpScore {
  double coherence = 0.0;   // [0, 10]
  double planning = 0.0;    // [0, 5]
  double efficiency = 0.0;  // [-1, 1]
  int etiquette = 0;        // {-1, 0, 1}
  int consistency = 0;      // {0, 1}
  std::string critique_text;

  bool operator==(const LdpScore&) const = default;
};

LdpScore clamp_ldp(LdpScore s);
// Channel values mapped onto comparable scales: coherence / 10, planning / 5.
std::array<double, 5> normalized_ldp(const LdpScore& s);

ordered_json ldp_to_json(const LdpScore& s);
LdpScore ldp_from_json(const nlohmann::json& j);

// (state digest, serialized action) of one executed step.
struct PrefixEntry {
  std::string state_digest;
  std::string action;

  bool operator==(const PrefixEntry&) const = default;
};

// -0.1 per redundant step in the prefix (a repeated (digest, action) pair),
// +0.5 when `terminal` and the prefix length is within tau_star; clamped to [-1, 1].
double efficiency_heuristic(const std::vector<PrefixEntry>& prefix, int tau_star, bool terminal);
int count_redundant(const std::vector<PrefixEntry>& prefix);

// Harness-observed facts shipped with a critique request so the deterministic
// stub can score without access to the episode.
struct CritiqueEvidence {
  std::vector<std::string> goal_keywords;
  std::vector<std::string> visible_texts;
  std::string target_text;
  bool milestone_matched = false;
  bool evp_penalty = false;
  bool targets_destructive = false;
  bool confirmation_pending = false;
  bool blocking_dialog_open = false;
  bool action_addresses_dialog = false;
  std::vector<std::string> typed_texts;
  std::vector<PrefixEntry> prefix;
  int tau_star = 1;
  bool terminal_success = false;

  bool operator==(const CritiqueEvidence&) const = default;
};

struct CritiqueRequest {
  std::string task_context;
  ScreenSnapshot state;
  std::string reasoning;
  std::optional<Action> action;
  PrincipleSet principles;
  std::string instructions;
  CritiqueEvidence evidence;

  // Rendered critique prompt: Task Context, Agent's Behavior,
  // Applicable Principles, Reward Model Task.
  std::string render() const;
  ordered_json to_json() const;
  static CritiqueRequest from_json(const nlohmann::json& j);
};

CritiqueRequest build_critique_request(std::string reasoning, const ScreenSnapshot& state,
                                       std::optional<Action> action, const PrincipleSet& principles,
                                       std::string task_context, CritiqueEvidence evidence = {});

class CritiqueProvider {
 public:
  virtual ~CritiqueProvider() = default;
  // May throw ProviderError; score_ldp retries.
  virtual LdpScore critique(const CritiqueRequest& request) = 0;
  virtual std::string name() const = 0;
};

// Deterministic rubric; a pure function of the request.
class StubCritiqueProvider final : public CritiqueProvider {
 public:
  LdpScore critique(const CritiqueRequest& request) override;
  std::string name() const override { return "stub"; }
};

// POSTs CritiqueRequest JSON to an http:// endpoint and reads an LdpScore body.
class HttpCritiqueProvider final : public CritiqueProvider {
 public:
  explicit HttpCritiqueProvider(std::string endpoint,
                                std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));
  LdpScore critique(const CritiqueRequest& request) override;
  std::string name() const override { return "http:" + endpoint_; }

 private:
  std::string endpoint_;
  std::string host_port_;
  std::string path_;
  std::chrono::milliseconds timeout_;
};

struct LdpOutcome {
  LdpScore score;
  bool failed = false;  // provider never answered; score is all zero
  int attempts = 0;
  std::string diagnostic;
};

LdpOutcome score_ldp(const CritiqueRequest& request, CritiqueProvider& provider, int max_attempts = 3);

// w_i and v_j multipliers with a linear LDP ramp.
struct AnnealSchedule {
  std::array<double, 5> evp_weights{1.0, 1.0, 1.0, 1.0, 1.0};
  std::array<double, 5> ldp_weights{1.0, 1.0, 1.0, 1.0, 1.0};
  long ldp_ramp_steps = 40000;
  long global_step = 40000;

  bool operator==(const AnnealSchedule&) const = default;
};

// (evp multiplier, ldp multiplier) = (1, min(1, step / ldp_ramp_steps)).
std::pair<double, double> anneal_weights(const AnnealSchedule& schedule, long step);

}  // namespace guirl
