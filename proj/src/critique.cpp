#include "guirl/critique.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "guirl/errors.hpp"
#include "guirl/turn.hpp"
#include "guirl/util.hpp"

namespace guirl {
namespace {

constexpr const char* kInstructions =
    "Judge the agent's reasoning (c_t) and action (a_t) in the screen state (s_t) against the "
    "principles above.\n"
    "- For each LLM-derived principle, give a numerical score and a short textual critique.\n"
    "- For each environment-verifiable principle, state whether the action satisfies it.";

enum class Casing { none, lower, upper, title, sentence, mixed };

Casing casing_of(const std::string& s) {
  bool any_alpha = false;
  bool any_upper = false;
  bool any_lower = false;
  bool title = true;
  bool sentence = true;
  bool first_alpha_seen = false;
  bool at_word_start = true;
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      at_word_start = true;
      continue;
    }
    if (std::isalpha(c)) {
      any_alpha = true;
      const bool up = std::isupper(c) != 0;
      any_upper = any_upper || up;
      any_lower = any_lower || !up;
      if (at_word_start ? !up : up) title = false;
      if (!first_alpha_seen) {
        if (!up) sentence = false;
        first_alpha_seen = true;
      } else if (up) {
        sentence = false;
      }
    }
    at_word_start = false;
  }
  if (!any_alpha) return Casing::none;
  if (!any_upper) return Casing::lower;
  if (!any_lower) return Casing::upper;
  if (title) return Casing::title;
  if (sentence) return Casing::sentence;
  return Casing::mixed;
}

// Reasoning after the last milestone token: the agent's current sub-goal.
std::string current_subgoal_text(const std::string& reasoning) {
  const auto ms = extract_milestones(reasoning);
  if (ms.empty()) return reasoning;
  const std::size_t close = reasoning.find(']', ms.back().position);
  return close == std::string::npos ? reasoning : reasoning.substr(close + 1);
}

std::string action_cue(const Action& a) {
  if (a.key) return *a.key;
  if (a.direction) return std::string(direction_name(*a.direction));
  if (a.type == ActionType::long_press) return "press";
  return std::string(action_type_name(a.type));
}

}  // namespace

LdpScore clamp_ldp(LdpScore s) {
  auto finite_or_zero = [](double v) { return std::isfinite(v) ? v : 0.0; };
  s.coherence = std::clamp(finite_or_zero(s.coherence), 0.0, 10.0);
  s.planning = std::clamp(finite_or_zero(s.planning), 0.0, 5.0);
  s.efficiency = std::clamp(finite_or_zero(s.efficiency), -1.0, 1.0);
  s.etiquette = s.etiquette > 0 ? 1 : (s.etiquette < 0 ? -1 : 0);
  s.consistency = s.consistency > 0 ? 1 : 0;
  return s;
}

std::array<double, 5> normalized_ldp(const LdpScore& s) {
  return {s.coherence / 10.0, s.planning / 5.0, s.efficiency, static_cast<double>(s.etiquette),
          static_cast<double>(s.consistency)};
}

ordered_json ldp_to_json(const LdpScore& s) {
  return ordered_json{{"coherence", s.coherence},   {"planning", s.planning},
                      {"efficiency", s.efficiency}, {"etiquette", s.etiquette},
                      {"consistency", s.consistency}, {"critique", s.critique_text}};
}

LdpScore ldp_from_json(const nlohmann::json& j) {
  try {
    LdpScore s;
    s.coherence = j.at("coherence").get<double>();
    s.planning = j.at("planning").get<double>();
    s.efficiency = j.at("efficiency").get<double>();
    s.etiquette = static_cast<int>(std::lround(j.at("etiquette").get<double>()));
    s.consistency = static_cast<int>(std::lround(j.at("consistency").get<double>()));
    s.critique_text = j.value("critique", "");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("ldp score: ") + e.what());
  }
}

int count_redundant(const std::vector<PrefixEntry>& prefix) {
  std::set<std::pair<std::string, std::string>> seen;
  int redundant = 0;
  for (const auto& e : prefix) {
    if (!seen.emplace(e.state_digest, e.action).second) ++redundant;
  }
  return redundant;
}

double efficiency_heuristic(const std::vector<PrefixEntry>& prefix, int tau_star, bool terminal) {
  double v = 0.0 - 0.1 * count_redundant(prefix);
  if (terminal && static_cast<int>(prefix.size()) <= tau_star) v += 0.5;
  return std::clamp(v, -1.0, 1.0);
}

std::string CritiqueRequest::render() const {
  std::ostringstream os;
  os << "### Task Context\n";
  os << "Instruction: \"" << task_context << "\"\n";
  os << "Current Screen State (s_t): snapshot " << state.digest << " @ step " << state.step_index;
  if (!evidence.visible_texts.empty()) {
    os << "; visible elements:";
    for (const auto& t : evidence.visible_texts) os << " '" << t << "'";
  }
  os << "\n\n";
  os << "### Agent's Behavior at Step t\n";
  os << "Agent's Reasoning (c_t):\n<think>\n" << reasoning << "\n</think>\n\n";
  os << "Agent's Action (a_t):\n<answer>\n" << (action ? serialize_action(*action) : "") << "\n</answer>\n\n";
  os << "### Applicable Principles for Evaluation (Subset of P)\n";
  int k = 1;
  os << "Explicit Domain Principles (Human-defined):\n";
  for (const auto& p : principles.principles()) {
    if (p.source == PrincipleSource::human) os << k++ << ". " << p.id << ": \"" << p.text << "\"\n";
  }
  os << "\nImplicit Learned Principles (LLM-derived):\n";
  for (const auto& p : principles.principles()) {
    if (p.source == PrincipleSource::llm) os << k++ << ". " << p.id << ": \"" << p.text << "\"\n";
  }
  os << "\n### Reward Model Task:\n" << instructions << "\n";
  return os.str();
}

ordered_json CritiqueRequest::to_json() const {
  ordered_json ev;
  ev["goal_keywords"] = evidence.goal_keywords;
  ev["visible_texts"] = evidence.visible_texts;
  ev["target_text"] = evidence.target_text;
  ev["milestone_matched"] = evidence.milestone_matched;
  ev["evp_penalty"] = evidence.evp_penalty;
  ev["targets_destructive"] = evidence.targets_destructive;
  ev["confirmation_pending"] = evidence.confirmation_pending;
  ev["blocking_dialog_open"] = evidence.blocking_dialog_open;
  ev["action_addresses_dialog"] = evidence.action_addresses_dialog;
  ev["typed_texts"] = evidence.typed_texts;
  ordered_json prefix = ordered_json::array();
  for (const auto& p : evidence.prefix) prefix.push_back({{"state_digest", p.state_digest}, {"action", p.action}});
  ev["prefix"] = std::move(prefix);
  ev["tau_star"] = evidence.tau_star;
  ev["terminal_success"] = evidence.terminal_success;

  ordered_json j;
  j["task_context"] = task_context;
  j["state"] = {{"digest", state.digest}, {"step_index", state.step_index}, {"cols", state.cols},
                {"rows", state.rows}, {"grid", state.grid}};
  j["reasoning"] = reasoning;
  j["action"] = action ? action_to_json(*action) : ordered_json(nullptr);
  j["principles"] = principles.to_json()["principles"];
  j["instructions"] = instructions;
  j["evidence"] = std::move(ev);
  j["prompt"] = render();
  return j;
}

CritiqueRequest CritiqueRequest::from_json(const nlohmann::json& j) {
  try {
    CritiqueRequest r;
    r.task_context = j.at("task_context").get<std::string>();
    const auto& st = j.at("state");
    r.state.digest = st.at("digest").get<std::string>();
    r.state.step_index = st.at("step_index").get<int>();
    r.state.cols = st.value("cols", 0);
    r.state.rows = st.value("rows", 0);
    if (st.contains("grid")) r.state.grid = st.at("grid").get<std::vector<std::string>>();
    r.reasoning = j.at("reasoning").get<std::string>();
    if (j.contains("action") && !j.at("action").is_null()) r.action = action_from_json(j.at("action"));
    r.principles = PrincipleSet::from_json(nlohmann::json{{"principles", j.at("principles")}});
    r.instructions = j.at("instructions").get<std::string>();
    const auto& ev = j.at("evidence");
    auto& e = r.evidence;
    e.goal_keywords = ev.at("goal_keywords").get<std::vector<std::string>>();
    e.visible_texts = ev.at("visible_texts").get<std::vector<std::string>>();
    e.target_text = ev.at("target_text").get<std::string>();
    e.milestone_matched = ev.at("milestone_matched").get<bool>();
    e.evp_penalty = ev.at("evp_penalty").get<bool>();
    e.targets_destructive = ev.at("targets_destructive").get<bool>();
    e.confirmation_pending = ev.at("confirmation_pending").get<bool>();
    e.blocking_dialog_open = ev.at("blocking_dialog_open").get<bool>();
    e.action_addresses_dialog = ev.at("action_addresses_dialog").get<bool>();
    e.typed_texts = ev.at("typed_texts").get<std::vector<std::string>>();
    for (const auto& p : ev.at("prefix")) {
      e.prefix.push_back({p.at("state_digest").get<std::string>(), p.at("action").get<std::string>()});
    }
    e.tau_star = ev.at("tau_star").get<int>();
    e.terminal_success = ev.at("terminal_success").get<bool>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("critique request: ") + e.what());
  }
}

CritiqueRequest build_critique_request(std::string reasoning, const ScreenSnapshot& state,
                                       std::optional<Action> action, const PrincipleSet& principles,
                                       std::string task_context, CritiqueEvidence evidence) {
  CritiqueRequest r;
  r.task_context = std::move(task_context);
  r.state = state;
  r.reasoning = std::move(reasoning);
  r.action = std::move(action);
  r.principles = principles;
  r.instructions = kInstructions;
  r.evidence = std::move(evidence);
  return r;
}

LdpScore StubCritiqueProvider::critique(const CritiqueRequest& req) {
  const auto& ev = req.evidence;
  const std::string reasoning = trim(req.reasoning);
  LdpScore s;
  std::ostringstream notes;

  if (!reasoning.empty()) {
    const bool cites_screen = std::any_of(ev.visible_texts.begin(), ev.visible_texts.end(),
                                          [&](const std::string& t) { return t.size() >= 2 && contains_ci(reasoning, t); });
    bool on_subgoal = false;
    if (req.action) {
      const std::string cue = ev.target_text.empty() ? action_cue(*req.action) : ev.target_text;
      on_subgoal = contains_ci(current_subgoal_text(reasoning), cue);
    }
    s.coherence = 2.0 * ev.milestone_matched + 2.0 * cites_screen + 2.0 * !ev.evp_penalty + 2.0 * on_subgoal;
    s.coherence = std::min(s.coherence, 10.0);
    notes << "milestone=" << ev.milestone_matched << " ui_cue=" << cites_screen
          << " no_penalty=" << !ev.evp_penalty << " on_subgoal=" << on_subgoal;

    const bool goal_ref = std::any_of(ev.goal_keywords.begin(), ev.goal_keywords.end(),
                                      [&](const std::string& k) { return contains_ci(reasoning, k); });
    const bool plans_next = contains_ci(reasoning, "next");
    s.planning = std::min(5.0, 4.0 * goal_ref + 1.0 * plans_next);
    notes << " goal_ref=" << goal_ref << " plans_next=" << plans_next;
  } else {
    notes << "empty reasoning";
  }

  s.efficiency = efficiency_heuristic(ev.prefix, ev.tau_star, ev.terminal_success);

  if (ev.targets_destructive) {
    s.etiquette = contains_ci(reasoning, "confirm") && ev.confirmation_pending ? 1 : -1;
  } else if (ev.blocking_dialog_open && !ev.action_addresses_dialog) {
    s.etiquette = -1;
  }

  if (ev.typed_texts.size() >= 2) {
    std::optional<Casing> style;
    bool consistent = true;
    for (const auto& t : ev.typed_texts) {
      const Casing c = casing_of(t);
      if (c == Casing::none) continue;
      if (c == Casing::mixed || (style && *style != c)) consistent = false;
      style = c;
    }
    s.consistency = consistent && style ? 1 : 0;
  }
  notes << " etiquette=" << s.etiquette << " consistency=" << s.consistency;
  s.critique_text = notes.str();
  return clamp_ldp(s);
}

LdpOutcome score_ldp(const CritiqueRequest& request, CritiqueProvider& provider, int max_attempts) {
  LdpOutcome out;
  for (int attempt = 1; attempt <= std::max(1, max_attempts); ++attempt) {
    out.attempts = attempt;
    try {
      out.score = clamp_ldp(provider.critique(request));
      out.failed = false;
      out.diagnostic.clear();
      return out;
    } catch (const ProviderError& e) {
      out.diagnostic = e.what();
    } catch (const SchemaError& e) {
      out.diagnostic = e.what();
    }
  }
  out.score = LdpScore{};
  out.score.critique_text = "provider failed: " + out.diagnostic;
  out.failed = true;
  return out;
}

std::pair<double, double> anneal_weights(const AnnealSchedule& schedule, long step) {
  if (schedule.ldp_ramp_steps <= 0) return {1.0, 1.0};
  const double ramp = static_cast<double>(std::max(0L, step)) / static_cast<double>(schedule.ldp_ramp_steps);
  return {1.0, std::min(1.0, ramp)};
}

}  // namespace guirl
