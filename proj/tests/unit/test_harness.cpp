#include "doctest.h"
#include "guirl/agent.hpp"
#include "guirl/episode.hpp"
#include "guirl/errors.hpp"
#include "guirl/util.hpp"
#include "support.hpp"

using namespace guirl;
using testsupport::Gen;

namespace {

std::shared_ptr<CritiqueProvider> stub() { return std::make_shared<StubCritiqueProvider>(); }

nlohmann::json export_json() {
  return nlohmann::json::parse(
      testsupport::read_file(default_template_dir() + "/export_pdf.json"));
}

std::string load_error(const nlohmann::json& j) {
  try {
    load_template(j, "t.json");
  } catch (const LoadError& e) {
    return e.what();
  }
  return "";
}

std::string tab_turn() { return "<think>waiting</think><answer>{\"type\":\"key_press\",\"key\":\"Tab\"}</answer>"; }

TrajectoryRecord gold_record(const std::string& id, std::uint64_t seed) {
  ScriptedAgent agent(AgentSpec::parse("gold"), seed);
  return run_episode(builtin_templates().at(id), seed, HarnessConfig{}, stub(), agent);
}

}  // namespace

TEST_CASE("template loader reports the offending field") {
  auto j = export_json();
  CHECK(load_error(j).empty());

  auto bad_app = j;
  bad_app["app_model"] = "spreadsheet";
  CHECK(load_error(bad_app).find("app_model") != std::string::npos);

  auto no_subtasks = j;
  no_subtasks["subtasks"] = nlohmann::json::array();
  CHECK(load_error(no_subtasks).find("subtasks") != std::string::npos);

  auto short_budget = j;
  short_budget["tau_star"] = 2;
  CHECK(load_error(short_budget).find("tau_star") != std::string::npos);

  auto bad_pred = j;
  bad_pred["subtasks"][1]["predicate"] = "node(save_dialog).open &&";
  CHECK(load_error(bad_pred).find("subtasks[1].predicate") != std::string::npos);

  auto bad_action = j;
  bad_action["gold_actions"][0]["action"] = {{"type", "click"}};
  CHECK(load_error(bad_action).find("gold_actions[0]") != std::string::npos);

  auto unknown_key = j;
  unknown_key["colour"] = "blue";
  CHECK_FALSE(load_error(unknown_key).empty());

  CHECK_THROWS_AS(load_template_file("/nonexistent/template.json"), LoadError);
}

TEST_CASE("shipped templates cover three platforms") {
  const auto& reg = builtin_templates();
  CHECK(reg.all().size() >= 5);
  std::set<Platform> platforms;
  for (const auto& t : reg.all()) platforms.insert(t.platform);
  CHECK(platforms.size() == 3);
  CHECK_THROWS_AS(reg.at("no_such_template"), LookupError);
}

TEST_CASE("reset is deterministic per seed") {
  for (const auto& t : builtin_templates().all()) {
    CAPTURE(t.id);
    Episode a(t, 9, HarnessConfig{}, stub());
    Episode b(t, 9, HarnessConfig{}, stub());
    CHECK(a.observation().snapshot == b.observation().snapshot);
    CHECK(a.observation().prompt.render() == b.observation().prompt.render());
    CHECK(a.t() == 1);
    CHECK_FALSE(a.done());
  }
  std::set<std::string> digests;
  for (std::uint64_t s = 1; s <= 8; ++s) {
    digests.insert(Episode(builtin_templates().at("delete_folder"), s, HarnessConfig{}, stub()).observation().snapshot.digest);
  }
  CHECK(digests.size() > 1);
}

TEST_CASE("mobile settings tree exposes a toggle") {
  const auto& t = builtin_templates().at("toggle_wifi");
  CHECK(t.platform == Platform::mobile);
  const Episode ep(t, 1, HarnessConfig{}, stub());
  bool toggle = false;
  ep.state().for_each([&](const UiNode& n) { toggle = toggle || (n.kind == NodeKind::checkbox && n.interactive); });
  CHECK(toggle);
}

TEST_CASE("first export step from a pixel click on the File button") {
  Episode ep(builtin_templates().at("export_pdf"), 1, HarnessConfig{}, stub());
  const std::string before = ep.observation().snapshot.digest;
  const auto res = ep.step_raw(
      "<think>[MILESTONE: MenuOpened] The File menu should hold the export entry.</think>"
      "<answer>{\"type\":\"click\",\"target\":{\"x\":412,\"y\":265},\"text\":\"\"}</answer>");
  CHECK(res.step.t == 1);
  CHECK(res.step.format_ok);
  CHECK(res.step.state_digest == before);
  REQUIRE(res.step.reward.milestone_events.size() == 1);
  CHECK(res.step.reward.milestone_events[0].outcome == MilestoneOutcome::credited);
  CHECK(res.step.reward.r_milestone == 0.5);
  CHECK(ep.credited().count("MenuOpened") == 1);
  CHECK(ep.check_subtask("MenuOpened"));
  CHECK(ep.t() == 2);
  for (const auto& e : res.step.reward.evp) {
    if (e.channel == Channel::target_bound) CHECK(e.value == 1.0);
    if (e.channel == Channel::action_type) CHECK(e.value == 1.0);
    if (e.channel == Channel::ui_transition) CHECK(e.value == 1.0);
    if (e.channel == Channel::format_validity) CHECK(e.value == 0.0);
  }
  CHECK(res.observation.step_index == 2);
  CHECK(res.observation.credited == std::vector<std::string>{"MenuOpened"});
}

TEST_CASE("malformed first turn scores -1 and leaves the state alone") {
  Episode ep(builtin_templates().at("export_pdf"), 1, HarnessConfig{}, stub());
  const std::string before = ep.observation().snapshot.digest;
  const auto res = ep.step_raw("<think>[MILESTONE: MenuOpened]</think><answer>{\"type\":\"click\"");
  CHECK_FALSE(res.step.format_ok);
  CHECK_FALSE(res.step.action.has_value());
  CHECK(res.step.reward.total == -1.0);
  CHECK(res.step.event.input.empty());
  CHECK(ep.observation().snapshot.digest == before);
  CHECK(ep.credited().empty());
  CHECK(ep.t() == 2);
}

TEST_CASE("an idle agent runs out of budget") {
  const auto& t = builtin_templates().at("create_folder");
  Episode ep(t, 4, HarnessConfig{}, stub());
  while (!ep.done()) ep.step_raw(tab_turn());
  CHECK(ep.done_reason() == "budget");
  CHECK(static_cast<int>(ep.steps().size()) == t.tau_star);
  CHECK_THROWS_AS(ep.step_raw(tab_turn()), LifecycleError);
  const auto rec = ep.record();
  CHECK(rec.T == t.tau_star);
  CHECK(rec.done_reason == "budget");
}

TEST_CASE("check_subtask follows the gold path") {
  const auto& t = builtin_templates().at("export_pdf");
  Episode ep(t, 2, HarnessConfig{}, stub());
  ScriptedAgent gold(AgentSpec::parse("gold"), 2);
  ep.step_raw(gold.next_turn(ep));
  CHECK(ep.check_subtask("MenuOpened"));
  CHECK_FALSE(ep.check_subtask("ExportDialogShown"));
  ep.step_raw(gold.next_turn(ep));
  CHECK(ep.check_subtask("ExportDialogShown"));
  CHECK_FALSE(ep.check_subtask("ExportConfirmed"));
  CHECK(ep.gold_cursor() == 2);
  CHECK_THROWS_AS(ep.check_subtask("Teleported"), LookupError);
}

TEST_CASE("no subtask holds at reset") {
  for (const auto& t : builtin_templates().all()) {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
      const Episode ep(t, seed, HarnessConfig{}, stub());
      for (const auto& s : t.subtasks) {
        CAPTURE(t.id);
        CAPTURE(s.label);
        CHECK_FALSE(ep.check_subtask(s.label));
      }
    }
  }
}

TEST_CASE("the gold agent completes every template and replays cleanly") {
  for (const auto& t : builtin_templates().all()) {
    for (std::uint64_t seed : {1ULL, 7ULL, 123456789ULL}) {
      CAPTURE(t.id);
      CAPTURE(seed);
      const auto rec = gold_record(t.id, seed);
      CHECK(rec.done_reason == "completed");
      CHECK(rec.credited.size() == t.subtasks.size());
      CHECK(rec.T <= t.tau_star);
      CHECK_NOTHROW(validate_trajectory(rec));
      const auto again = replay(rec, builtin_templates());
      CHECK(again.R == rec.R);
      for (const auto& s : rec.steps) {
        for (const auto& m : s.reward.milestone_events) CHECK(m.outcome == MilestoneOutcome::credited);
        CHECK(s.format_ok);
      }
    }
  }
}

TEST_CASE("the lazy agent is charged for skipped milestones") {
  ScriptedAgent lazy(AgentSpec::parse("lazy"), 3);
  const auto& t = builtin_templates().at("export_pdf");
  const auto rec = run_episode(t, 3, HarnessConfig{}, stub(), lazy);
  int missed = 0;
  for (const auto& s : rec.steps) {
    for (const auto& m : s.reward.milestone_events) {
      CHECK(m.outcome == MilestoneOutcome::missed);
      CHECK(m.value == -0.5);
      ++missed;
    }
  }
  CHECK(missed == static_cast<int>(t.subtasks.size()));
  CHECK(rec.credited.empty());
  CHECK(rec.done_reason == "completed");
}

TEST_CASE("re-declaring a credited milestone earns nothing") {
  Episode ep(builtin_templates().at("export_pdf"), 1, HarnessConfig{}, stub());
  const std::string click = "<answer>{\"type\":\"click\",\"target\":\"file_menu_button\"}</answer>";
  ep.step_raw("<think>[MILESTONE: MenuOpened]</think>" + click);
  const auto res = ep.step_raw("<think>[MILESTONE: MenuOpened]</think>" + click);
  REQUIRE(res.step.reward.milestone_events.size() >= 1);
  CHECK(res.step.reward.milestone_events[0].outcome == MilestoneOutcome::repeated);
  CHECK(res.step.reward.milestone_events[0].value == 0.0);
}

TEST_CASE("replay flags tampered records") {
  const auto rec = gold_record("export_pdf", 5);
  REQUIRE(rec.T >= 2);

  auto action = rec;
  action.steps[1].action->target = Target{Point{1, 1}};
  try {
    replay(action, builtin_templates());
    FAIL("tampered action replayed");
  } catch (const ReplayMismatch& e) {
    CHECK(e.step() == 2);
    CHECK(e.field() == "action");
  }

  auto reward = rec;
  reward.steps[0].reward.r_env += 1.0;
  try {
    replay(reward, builtin_templates());
    FAIL("tampered reward replayed");
  } catch (const ReplayMismatch& e) {
    CHECK(e.step() == 1);
    CHECK(e.field().rfind("reward", 0) == 0);
  }

  auto total = rec;
  total.R += kRewardQuantum;
  CHECK_THROWS_AS(replay(total, builtin_templates()), ReplayMismatch);

  auto raw = rec;
  raw.steps[0].raw = tab_turn();
  CHECK_THROWS_AS(replay(raw, builtin_templates()), ReplayMismatch);

  auto unknown = rec;
  unknown.template_id = "missing";
  CHECK_THROWS_AS(replay(unknown, builtin_templates()), LookupError);
}

TEST_CASE("random actions never crash the harness") {
  Gen g(51);
  const auto& all = builtin_templates().all();
  int steps = 0;
  int episodes = 0;
  while (steps < 10000) {
    const auto& t = all[static_cast<std::size_t>(episodes++) % all.size()];
    Episode ep(t, g.bits(), HarnessConfig{}, stub());
    while (!ep.done() && steps < 10000) {
      const auto ids = testsupport::node_ids(ep.state());
      const Action a = testsupport::random_action(g, ids, ep.state().viewport());
      std::string think = g.chance(0.3) ? "[MILESTONE: " + g.pick(std::vector<std::string>{"MenuOpened", "x", "FormFilled"}) + "]" : "";
      const std::string raw = g.chance(0.05) ? g.bytes(60) : render_turn(think + g.word(0, 20), a);
      StepResult res;
      REQUIRE_NOTHROW(res = ep.step_raw(raw));
      ++steps;
      const auto& r = res.step.reward;
      REQUIRE(r.total == r.r_env + r.r_critique + r.r_milestone);
      REQUIRE(res.step.event.step == res.step.t);
    }
    if (ep.done()) REQUIRE_NOTHROW(validate_trajectory(ep.record()));
  }
  CHECK(steps == 10000);
}

TEST_CASE("event bus streams stay aligned by step") {
  const auto rec = gold_record("web_register", 11);
  for (std::size_t i = 0; i < rec.steps.size(); ++i) {
    const auto& s = rec.steps[i];
    CHECK(s.t == static_cast<int>(i) + 1);
    CHECK(s.event.step == s.t);
    CHECK(s.event.input == (s.action ? serialize_action(*s.action) : ""));
    CHECK(s.event.screen.digest == digest_hex(s.event.dom));
    if (i + 1 < rec.steps.size()) CHECK(rec.steps[i + 1].state_digest == s.event.screen.digest);
  }
}

TEST_CASE("observation json carries the prompt and flags") {
  Episode ep(builtin_templates().at("export_pdf"), 1, HarnessConfig{}, stub());
  const auto j = ep.observation().to_json();
  CHECK(j.at("step_index") == 1);
  CHECK(j.at("done") == false);
  CHECK(j.at("milestones_credited").empty());
  CHECK(j.at("prompt").get<std::string>().find("<principles>") != std::string::npos);
  CHECK(j.at("screen").at("digest") == ep.observation().snapshot.digest);
}
