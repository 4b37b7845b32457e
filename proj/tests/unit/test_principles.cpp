#include "doctest.h"
#include "guirl/app_model.hpp"
#include "guirl/critique.hpp"
#include "guirl/errors.hpp"
#include "guirl/evp.hpp"
#include "guirl/template.hpp"
#include "support.hpp"

using namespace guirl;
using testsupport::Gen;

namespace {

Action click(Target t) {
  Action a;
  a.type = ActionType::click;
  a.target = std::move(t);
  return a;
}

EventBusRecord event_with(std::vector<std::string> events, int step = 1) {
  EventBusRecord r;
  r.step = step;
  r.system_events = std::move(events);
  return r;
}

class FailingProvider : public CritiqueProvider {
 public:
  int calls = 0;
  LdpScore critique(const CritiqueRequest&) override {
    ++calls;
    throw ProviderError("connection refused");
  }
  std::string name() const override { return "failing"; }
};

class FlakyProvider : public CritiqueProvider {
 public:
  int calls = 0;
  LdpScore critique(const CritiqueRequest&) override {
    if (++calls < 3) throw ProviderError("timeout");
    LdpScore s;
    s.coherence = 42;  // out of range: clamped
    s.planning = 3;
    return s;
  }
  std::string name() const override { return "flaky"; }
};

}  // namespace

TEST_CASE("evp_action_type") {
  Action scroll;
  scroll.type = ActionType::scroll;
  scroll.direction = Direction::down;
  Action t1;
  t1.type = ActionType::type;
  t1.text = "a";
  Action t2 = t1;
  t2.text = "something else";
  CHECK(evp_action_type(click(Point{1, 1}), click(std::string("x"))) == 1);
  CHECK(evp_action_type(click(Point{1, 1}), scroll) == 0);
  CHECK(evp_action_type(t1, t2) == 1);
}

TEST_CASE("evp_target_bound examples") {
  CHECK(evp_target_bound({50, 50}, {50, 50}, {100, 100}) == 1.0);
  CHECK(evp_target_bound({60, 70}, {50, 50}, {100, 100}) == doctest::Approx(0.85).epsilon(1e-12));
  CHECK(evp_target_bound({100, 100}, {0, 0}, {100, 100}) == 0.0);
  CHECK(evp_target_bound({5000, -3000}, {0, 0}, {100, 100}) == 0.0);
}

TEST_CASE("evp_target_bound agrees with the pixel-walk oracle") {
  Gen g(31);
  for (int i = 0; i < 2000; ++i) {
    const Viewport vp{g.int_in(1, 400), g.int_in(1, 400)};
    const Point gold{g.int_in(0, vp.width - 1), g.int_in(0, vp.height - 1)};
    const Point p = g.chance(0.1) ? gold : Point{g.int_in(-vp.width, 2 * vp.width), g.int_in(-vp.height, 2 * vp.height)};
    const double r = evp_target_bound(p, gold, vp);
    REQUIRE(std::fabs(r - testsupport::oracle_target_bound(p, gold, vp)) <= 1e-12);
    REQUIRE((r == 1.0) == (p == gold));
    REQUIRE(r >= 0.0);
    REQUIRE(r <= 1.0);
  }
}

TEST_CASE("evp_ui_transition on the editor menu") {
  const AppModel& app = find_app_model("text_editor");
  const UiTree s0 = app.initial_state(1);
  const auto pred = StatePredicate::parse("node(file_menu).open && node(file_menu).visible");
  const UiTree s1 = app.apply(s0, click(std::string("file_menu_button"))).next;
  CHECK(evp_ui_transition(s1, pred, {}).value == 1.0);
  CHECK(evp_ui_transition(s0, pred, {}).value == 0.0);

  const auto ghost = StatePredicate::parse("node(export_dialog_gone).open");
  const auto r = evp_ui_transition(s1, ghost, {});
  CHECK(r.value == 0.0);
  CHECK(r.detail.find("evaluation error") != std::string::npos);
  CHECK(r.detail.find("export_dialog_gone") != std::string::npos);
}

TEST_CASE("evp_format_validity") {
  CHECK(evp_format_validity(parse_turn(
            "<think>[MILESTONE: MenuOpened] ok</think><answer>{\"type\":\"click\",\"target\":{\"x\":412,\"y\":265},"
            "\"text\":\"\"}</answer>")) == 0);
  CHECK(evp_format_validity(parse_turn("<think>a</think><answer>{\"type\":\"scroll\",\"direction\":\"up\"}")) == -1);
  CHECK(evp_format_validity(parse_turn("<think>a</think><answer>{\"type\":}</answer>")) == -1);
}

TEST_CASE("evp_safety_guard") {
  const AppModel& app = find_app_model("file_manager");
  const UiTree s0 = app.initial_state(3);
  const auto& destructive = app.destructive_nodes();
  const Action del = click(std::string("tb_delete_permanent"));
  CHECK(evp_safety_guard(del, s0, {}, destructive) == -1);
  CHECK(evp_safety_guard(del, s0, {event_with({"confirm_accepted"})}, destructive) == 0);
  // one confirmation covers one destructive action
  CHECK(evp_safety_guard(del, s0, {event_with({"confirm_accepted"}), event_with({"destructive_done"}, 2)},
                         destructive) == -1);
  CHECK(evp_safety_guard(click(std::string("tb_rename")), s0, {}, destructive) == 0);
  const Point centre = s0.at("tb_delete_permanent").rect.center();
  CHECK(evp_safety_guard(click(centre), s0, {}, destructive) == -1);
}

TEST_CASE("applicability expressions") {
  Action c = click(Point{0, 0});
  ApplicabilityContext ctx{&c, false, true};
  CHECK(Applicability::parse("action_in(click, select)").evaluate(ctx));
  CHECK_FALSE(Applicability::parse("action_in(scroll)").evaluate(ctx));
  CHECK(Applicability::parse("dialog_open && !targets_destructive").evaluate(ctx));
  CHECK(Applicability::parse("never || (always && dialog_open)").evaluate(ctx));
  ApplicabilityContext malformed{nullptr, false, false};
  CHECK_FALSE(Applicability::parse("action_in(click)").evaluate(malformed));
  CHECK_THROWS_AS(Applicability::parse("action_in(click"), SchemaError);
  CHECK_THROWS_AS(Applicability::parse("sometimes"), SchemaError);
  CHECK_THROWS_AS(Applicability::parse("always &&"), SchemaError);
  CHECK_THROWS_AS(Applicability::parse("action_in(hover)"), SchemaError);
}

TEST_CASE("principle set basics") {
  const auto& p = default_principles();
  CHECK(p.human_count() == 6);
  CHECK(p.llm_count() == 5);
  for (Channel c : kEvpChannels) {
    bool mapped = false;
    for (const auto& pr : p.principles()) mapped = mapped || pr.channel == c;
    CHECK(mapped);
  }
  for (Channel c : kLdpChannels) {
    bool mapped = false;
    for (const auto& pr : p.principles()) mapped = mapped || pr.channel == c;
    CHECK(mapped);
  }
  const auto sub = p.subset({"LDP_Coherence", "missing", "EVP_SafetyGuard"});
  REQUIRE(sub.size() == 2);
  CHECK(sub.principles()[0].id == "LDP_Coherence");
  CHECK_THROWS_AS(PrincipleSet({p.principles()[0], p.principles()[0]}), SchemaError);
}

TEST_CASE("shipped principles.json matches the built-in catalog") {
  const auto loaded = PrincipleSet::load_file(default_principles_file());
  CHECK(loaded.to_json() == default_principles().to_json());
}

TEST_CASE("critique request for a delete scenario") {
  const AppModel& app = find_app_model("file_manager");
  const UiTree s0 = app.initial_state(3);
  const Action del = click(std::string("tb_delete_permanent"));
  const ApplicabilityContext ctx{&del, true, false};
  const PrincipleSet applicable = default_principles().applicable(ctx);
  const auto snap = render_snapshot(s0);
  const auto req = build_critique_request("I delete the folder now.", snap, del, applicable,
                                          "Delete the Drafts folder after confirming the deletion.");
  const std::string text = req.render();
  CHECK(text.find(default_principles().find("EVP_SafetyGuard")->text) != std::string::npos);
  CHECK(text.find(default_principles().find("LDP_Coherence")->text) != std::string::npos);
  CHECK(text.find("### Task Context") != std::string::npos);
  CHECK(text.find("### Reward Model Task") != std::string::npos);
  CHECK(text.find(snap.digest) != std::string::npos);
  const auto again = build_critique_request("I delete the folder now.", snap, del, applicable,
                                            "Delete the Drafts folder after confirming the deletion.");
  CHECK(again.render() == text);
  CHECK(again.to_json() == req.to_json());

  const auto back = CritiqueRequest::from_json(nlohmann::json::parse(req.to_json().dump()));
  CHECK(back.to_json() == req.to_json());

  const auto empty = build_critique_request("r", snap, del, PrincipleSet{}, "goal");
  const std::string e = empty.render();
  CHECK(e.find("Explicit Domain Principles (Human-defined):\n\nImplicit") != std::string::npos);
  CHECK(e.find("### Reward Model Task") != std::string::npos);
}

TEST_CASE("stub rubric: matched milestone, cited cue, no penalty") {
  CritiqueEvidence ev;
  ev.goal_keywords = {"export", "pdf"};
  ev.visible_texts = {"File", "Edit"};
  ev.target_text = "File";
  ev.milestone_matched = true;
  ScreenSnapshot snap;
  snap.digest = "0000000000000000";
  const auto req = build_critique_request("[MILESTONE: MenuOpened] The File menu holds export.", snap,
                                          click(std::string("file_menu_button")), default_principles(), "goal", ev);
  StubCritiqueProvider stub;
  const LdpScore s = stub.critique(req);
  // 2 milestone + 2 screen cue + 2 no penalty + 2 sub-goal cue
  CHECK(s.coherence == 8.0);
  // 4 goal reference, no "next"
  CHECK(s.planning == 4.0);
  CHECK(s.etiquette == 0);
  CHECK(s.consistency == 0);
  CHECK(stub.critique(req) == s);
}

TEST_CASE("stub rubric: destructive action without confirmation") {
  CritiqueEvidence ev;
  ev.targets_destructive = true;
  ScreenSnapshot snap;
  const Action del = click(std::string("confirm_delete"));
  StubCritiqueProvider stub;
  CHECK(stub.critique(build_critique_request("Delete it.", snap, del, default_principles(), "g", ev)).etiquette == -1);
  ev.confirmation_pending = true;
  CHECK(stub.critique(build_critique_request("Confirmed, so delete.", snap, del, default_principles(), "g", ev))
            .etiquette == 1);
}

TEST_CASE("stub rubric: empty reasoning floors coherence") {
  CritiqueEvidence ev;
  ev.visible_texts = {"File"};
  ev.milestone_matched = true;
  const auto req = build_critique_request("   ", ScreenSnapshot{}, click(Point{1, 1}), default_principles(), "g", ev);
  const LdpScore s = StubCritiqueProvider{}.critique(req);
  CHECK(s.coherence == 0.0);
  CHECK(s.planning == 0.0);
}

TEST_CASE("stub rubric: casing consistency") {
  StubCritiqueProvider stub;
  auto with_typed = [&](std::vector<std::string> typed) {
    CritiqueEvidence ev;
    ev.typed_texts = std::move(typed);
    return stub.critique(build_critique_request("x", ScreenSnapshot{}, std::nullopt, PrincipleSet{}, "g", ev))
        .consistency;
  };
  CHECK(with_typed({"Alice Smith", "Main Street"}) == 1);
  CHECK(with_typed({"alice", "MAIN"}) == 0);
  CHECK(with_typed({"Alice"}) == 0);
  CHECK(with_typed({"aLiCe", "bob"}) == 0);
}

TEST_CASE("efficiency heuristic") {
  const std::vector<PrefixEntry> clean{{"a", "1"}, {"b", "2"}, {"c", "3"}};
  CHECK(efficiency_heuristic(clean, 3, true) == 0.5);
  CHECK(efficiency_heuristic(clean, 2, true) == 0.0);
  CHECK(efficiency_heuristic(clean, 3, false) == 0.0);
  const std::vector<PrefixEntry> two{{"a", "1"}, {"a", "1"}, {"b", "2"}, {"b", "2"}};
  CHECK(count_redundant(two) == 2);
  CHECK(efficiency_heuristic(two, 10, false) == -0.2);
  std::vector<PrefixEntry> twelve(13, PrefixEntry{"s", "a"});
  CHECK(count_redundant(twelve) == 12);
  CHECK(efficiency_heuristic(twelve, 20, false) == -1.0);
  CHECK_FALSE(std::signbit(efficiency_heuristic({}, 1, false)));
}

TEST_CASE("anneal schedule") {
  AnnealSchedule s;
  CHECK(anneal_weights(s, 0) == std::pair<double, double>(1.0, 0.0));
  CHECK(anneal_weights(s, 20000) == std::pair<double, double>(1.0, 0.5));
  CHECK(anneal_weights(s, 40000) == std::pair<double, double>(1.0, 1.0));
  CHECK(anneal_weights(s, 90000) == std::pair<double, double>(1.0, 1.0));
  CHECK(anneal_weights(s, -5) == std::pair<double, double>(1.0, 0.0));
}

TEST_CASE("score_ldp never fabricates scores") {
  FailingProvider failing;
  const auto req = build_critique_request("x", ScreenSnapshot{}, std::nullopt, PrincipleSet{}, "g");
  const auto out = score_ldp(req, failing, 3);
  CHECK(out.failed);
  CHECK(failing.calls == 3);
  CHECK(out.attempts == 3);
  CHECK(out.score.coherence == 0.0);
  CHECK(out.score.planning == 0.0);
  CHECK(out.score.efficiency == 0.0);
  CHECK(out.score.etiquette == 0);
  CHECK(out.score.consistency == 0);
  CHECK(out.diagnostic.find("connection refused") != std::string::npos);

  FlakyProvider flaky;
  const auto ok = score_ldp(req, flaky, 3);
  CHECK_FALSE(ok.failed);
  CHECK(ok.attempts == 3);
  CHECK(ok.score.coherence == 10.0);
  CHECK(ok.score.planning == 3.0);
}

TEST_CASE("stub output stays in range on random evidence") {
  Gen g(32);
  StubCritiqueProvider stub;
  const std::vector<std::string> words{"File", "export", "next", "confirm", "Delete", "x", "[MILESTONE: A]"};
  for (int i = 0; i < 3000; ++i) {
    CritiqueEvidence ev;
    for (int k = g.int_in(0, 3); k > 0; --k) ev.visible_texts.push_back(g.pick(words));
    for (int k = g.int_in(0, 2); k > 0; --k) ev.goal_keywords.push_back(g.pick(words));
    for (int k = g.int_in(0, 4); k > 0; --k) ev.typed_texts.push_back(g.word(0, 6));
    for (int k = g.int_in(0, 20); k > 0; --k) ev.prefix.push_back({g.word(1, 1), g.word(1, 1)});
    ev.milestone_matched = g.chance(0.5);
    ev.evp_penalty = g.chance(0.5);
    ev.targets_destructive = g.chance(0.3);
    ev.confirmation_pending = g.chance(0.5);
    ev.blocking_dialog_open = g.chance(0.3);
    ev.tau_star = g.int_in(1, 10);
    ev.terminal_success = g.chance(0.3);
    std::string reasoning;
    for (int k = g.int_in(0, 6); k > 0; --k) reasoning += g.pick(words) + " ";
    const auto s = stub.critique(build_critique_request(reasoning, ScreenSnapshot{},
                                                        testsupport::random_action(g), PrincipleSet{}, "g", ev));
    REQUIRE(s.coherence >= 0.0);
    REQUIRE(s.coherence <= 10.0);
    REQUIRE(s.planning >= 0.0);
    REQUIRE(s.planning <= 5.0);
    REQUIRE(s.efficiency >= -1.0);
    REQUIRE(s.efficiency <= 1.0);
    REQUIRE(s.etiquette >= -1);
    REQUIRE(s.etiquette <= 1);
    REQUIRE((s.consistency == 0 || s.consistency == 1));
  }
}
