#include "guirl/prompt.hpp"

#include <sstream>

namespace guirl {
namespace {

constexpr const char* kSystem =
    "You operate a graphical interface, one action per turn.\n"
    "Reason inside <think> ... </think>, then give exactly one JSON action inside <answer> ... </answer>.";

constexpr const char* kFormatRules =
    "- Put your reasoning in <think> ... </think>.\n"
    "- Follow it with <answer> ... </answer> holding one JSON action, e.g. "
    "{\"type\":\"click\",\"target\":{\"x\":412,\"y\":265}} or {\"type\":\"type\",\"target\":\"name_field\",\"text\":\"Work\"}.\n"
    "- Action types: click, type, scroll, key_press, swipe, drag, select, long_press.\n"
    "- When a sub-goal is done, write [MILESTONE: <label>] in your reasoning.";

}  // namespace

PrincipleSet prompt_principles(const TaskTemplate& tmpl, const PrincipleSet& principles) {
  if (!tmpl.prompt_principles.empty()) return principles.subset(tmpl.prompt_principles);
  std::vector<std::string> ids;
  for (const auto& p : principles.principles()) {
    if (p.source == PrincipleSource::human) ids.push_back(p.id);
  }
  return principles.subset(ids);
}

StepPrompt build_step_prompt(const TaskTemplate& tmpl, const ScreenSnapshot& snapshot, int t,
                             const PrincipleSet& principles) {
  StepPrompt p;
  p.system = kSystem;
  p.task = tmpl.goal;
  std::ostringstream block;
  block << "<principles>\n";
  int i = 1;
  const PrincipleSet shown = prompt_principles(tmpl, principles);
  for (const auto& pr : shown.principles()) {
    block << "P" << i++ << "  " << pr.text << "\n";
  }
  block << "</principles>";
  p.principles_block = block.str();
  p.screenshot_ref = snapshot.encoded();
  p.screen_digest = snapshot.digest;
  p.step_index = t;
  p.format_rules = kFormatRules;
  return p;
}

std::string StepPrompt::render() const {
  std::ostringstream os;
  os << "### SYSTEM\n" << system << "\n\n";
  os << "### Task\n" << task << "\n\n";
  os << principles_block << "\n\n";
  os << "<screen>\n![screen " << screen_digest << "](data:text/x-ui-cells;base64," << screenshot_ref << ") @ step "
     << step_index << "\n</screen>\n\n";
  os << "FORMAT RULES:\n" << format_rules << "\n";
  return os.str();
}

ordered_json StepPrompt::to_json() const {
  return ordered_json{{"system", system},
                      {"task", task},
                      {"principles_block", principles_block},
                      {"screenshot_ref", screenshot_ref},
                      {"screen_digest", screen_digest},
                      {"step_index", step_index},
                      {"format_rules", format_rules},
                      {"text", render()}};
}

}  // namespace guirl
