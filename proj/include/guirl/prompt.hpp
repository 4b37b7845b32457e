#pragma once

#include <string>

#include "guirl/principles.hpp"
#include "guirl/template.hpp"
#include "guirl/ui_tree.hpp"

namespace guirl {

struct StepPrompt {
  std::string system;
  std::string task;
  std::string principles_block;  // includes the <principles> tags
  std::string screenshot_ref;    // base64 cell grid
  std::string screen_digest;
  int step_index = 1;
  std::string format_rules;

  std::string render() const;
  ordered_json to_json() const;
};

// The template's prompt_principles (in listed order) drawn from `principles`;
// all human-defined members when the template lists none.
PrincipleSet prompt_principles(const TaskTemplate& tmpl, const PrincipleSet& principles);

StepPrompt build_step_prompt(const TaskTemplate& tmpl, const ScreenSnapshot& snapshot, int t,
                             const PrincipleSet& principles);

}  // namespace guirl
