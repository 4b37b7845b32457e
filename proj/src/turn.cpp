#include "guirl/turn.hpp"

#include "guirl/errors.hpp"
#include "guirl/util.hpp"

namespace guirl {
namespace {

constexpr std::string_view kMilestoneOpen = "[MILESTONE:";
constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";

std::size_t count_of(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (std::size_t pos = hay.find(needle); pos != std::string_view::npos;
       pos = hay.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

}  // namespace

std::vector<Milestone> extract_milestones(std::string_view think) {
  std::vector<Milestone> out;
  std::size_t pos = think.find(kMilestoneOpen);
  while (pos != std::string_view::npos) {
    const std::size_t body = pos + kMilestoneOpen.size();
    const std::size_t stop = think.find_first_of("]\n", body);
    if (stop != std::string_view::npos && think[stop] == ']') {
      std::string label = trim(think.substr(body, stop - body));
      if (!label.empty()) out.push_back({std::move(label), pos});
      pos = think.find(kMilestoneOpen, stop + 1);
    } else {
      pos = think.find(kMilestoneOpen, pos + 1);
    }
  }
  return out;
}

AgentTurn parse_turn(std::string_view raw) {
  AgentTurn turn;
  turn.raw = std::string(raw);
  try {
    for (auto tag : {kThinkOpen, kThinkClose, kAnswerOpen, kAnswerClose}) {
      const std::size_t n = count_of(raw, tag);
      if (n != 1) {
        turn.diagnostic = "expected exactly one " + std::string(tag) + ", found " + std::to_string(n);
        return turn;
      }
    }
    const std::size_t t_open = raw.find(kThinkOpen);
    const std::size_t t_close = raw.find(kThinkClose);
    const std::size_t a_open = raw.find(kAnswerOpen);
    const std::size_t a_close = raw.find(kAnswerClose);
    if (!(t_open < t_close && t_close < a_open && a_open < a_close)) {
      turn.diagnostic = "tags out of order; expected <think>...</think> then <answer>...</answer>";
      return turn;
    }
    const std::size_t think_begin = t_open + kThinkOpen.size();
    turn.think = std::string(raw.substr(think_begin, t_close - think_begin));
    turn.milestones = extract_milestones(turn.think);

    const std::size_t answer_begin = a_open + kAnswerOpen.size();
    const std::string body = trim(raw.substr(answer_begin, a_close - answer_begin));
    try {
      turn.answer = deserialize_action(body);
      turn.format_ok = true;
    } catch (const SchemaError& e) {
      turn.diagnostic = std::string("answer: ") + e.what();
    }
  } catch (const std::exception& e) {
    turn.answer.reset();
    turn.format_ok = false;
    turn.diagnostic = std::string("parse failure: ") + e.what();
  }
  return turn;
}

std::string render_turn(std::string_view think, const Action& action) {
  std::string out;
  out += kThinkOpen;
  out += think;
  out += kThinkClose;
  out += "\n\n";
  out += kAnswerOpen;
  out += '\n';
  out += serialize_action(action);
  out += '\n';
  out += kAnswerClose;
  return out;
}

}  // namespace guirl
