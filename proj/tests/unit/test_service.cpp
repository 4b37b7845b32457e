#include <atomic>
#include <cstdlib>
#include <thread>

#include <sys/wait.h>

#include "doctest.h"
#include "httplib.h"
#include "guirl/agent.hpp"
#include "guirl/errors.hpp"
#include "guirl/service.hpp"
#include "guirl/store.hpp"
#include "support.hpp"

using namespace guirl;
using json = nlohmann::json;
using testsupport::TempDir;

namespace {

std::string envelope(const json& body, const json& request_id = nullptr, int version = kProtocolVersion) {
  return json{{"protocol_version", version}, {"request_id", request_id}, {"body", body}}.dump();
}

json parse(const HttpResponse& r) { return json::parse(r.body); }

std::string error_code(const HttpResponse& r) {
  const auto j = parse(r);
  return j.at("error").is_null() ? "" : j.at("error").at("code").get<std::string>();
}

std::string create(EpisodeService& svc, const std::string& tid = "export_pdf", std::uint64_t seed = 7) {
  const auto r = svc.handle("POST", "/v1/episodes", envelope({{"template_id", tid}, {"seed", seed}}));
  REQUIRE(r.status == 201);
  return parse(r).at("body").at("episode_id").get<std::string>();
}

HttpResponse step(EpisodeService& svc, const std::string& id, const std::string& raw, const json& rid = nullptr) {
  return svc.handle("POST", "/v1/episodes/" + id + "/step", envelope({{"raw_turn", raw}}, rid));
}

const std::string kFirstTurn =
    "<think>[MILESTONE: MenuOpened] File holds the export entry.</think>"
    "<answer>{\"type\":\"click\",\"target\":{\"x\":412,\"y\":265},\"text\":\"\"}</answer>";

TrajectoryRecord gold_record(const std::string& tid, std::uint64_t seed) {
  ScriptedAgent agent(AgentSpec::parse("gold"), seed);
  return run_episode(builtin_templates().at(tid), seed, HarnessConfig{}, std::make_shared<StubCritiqueProvider>(),
                     agent);
}

struct Cli {
  int code = -1;
  std::string out;
  std::string err;
};

Cli cli(const TempDir& dir, const std::string& args) {
  const std::string out = dir.file("stdout.txt");
  const std::string err = dir.file("stderr.txt");
  const std::string cmd = std::string(GUIRL_CLI_PATH) + " " + args + " >" + out + " 2>" + err;
  const int status = std::system(cmd.c_str());
  Cli r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = testsupport::read_file(out);
  r.err = testsupport::read_file(err);
  return r;
}

}  // namespace

TEST_CASE("create episodes") {
  EpisodeService svc(builtin_templates(), ServiceConfig{});
  const auto r1 = svc.handle("POST", "/v1/episodes", envelope({{"template_id", "export_pdf"}, {"seed", 7}}, "a"));
  const auto r2 = svc.handle("POST", "/v1/episodes", envelope({{"template_id", "export_pdf"}, {"seed", 7}}, "b"));
  REQUIRE(r1.status == 201);
  const auto j1 = parse(r1);
  const auto j2 = parse(r2);
  CHECK(j1.at("protocol_version") == kProtocolVersion);
  CHECK(j1.at("request_id") == "a");
  CHECK(j1.at("error").is_null());
  CHECK(j1["body"]["observation"]["step_index"] == 1);
  CHECK(j1["body"]["episode_id"] != j2["body"]["episode_id"]);
  CHECK(j1["body"]["observation"]["screen"]["digest"] == j2["body"]["observation"]["screen"]["digest"]);
  CHECK(svc.episode_count() == 2);

  const auto missing = svc.handle("POST", "/v1/episodes", envelope({{"template_id", "nonexistent"}, {"seed", 1}}, "c"));
  CHECK(missing.status == 404);
  CHECK(error_code(missing) == "TEMPLATE_NOT_FOUND");
  CHECK(parse(missing).at("request_id") == "c");
  CHECK(error_code(svc.handle("POST", "/v1/episodes", envelope({{"seed", 1}}))) == "SCHEMA_INVALID");
  CHECK(error_code(svc.handle("POST", "/v1/episodes", envelope({{"template_id", "export_pdf"}, {"seed", -3}}))) ==
        "SCHEMA_INVALID");
}

TEST_CASE("step responses match an in-process step") {
  EpisodeService svc(builtin_templates(), ServiceConfig{});
  const std::string id = create(svc);
  const auto r = step(svc, id, kFirstTurn);
  REQUIRE(r.status == 200);
  const auto body = parse(r).at("body");
  bool saw = false;
  for (const auto& e : body.at("reward").at("evp")) {
    if (e.at("channel") == "ui_transition") {
      CHECK(e.at("value") == 1.0);
      saw = true;
    }
  }
  CHECK(saw);

  Episode local(builtin_templates().at("export_pdf"), 7, HarnessConfig{}, std::make_shared<StubCritiqueProvider>());
  CHECK(body.dump() == json::parse(local.step_raw(kFirstTurn).to_json().dump()).dump());

  const auto g = svc.handle("GET", "/v1/episodes/" + id, "");
  CHECK(g.status == 200);
  CHECK(parse(g)["body"]["t"] == 2);
  CHECK(error_code(step(svc, "ep-999", kFirstTurn)) == "EPISODE_NOT_FOUND");
  CHECK(step(svc, "ep-999", kFirstTurn).status == 404);
  CHECK(error_code(svc.handle("POST", "/v1/episodes/" + id + "/step", envelope({{"raw", "x"}}))) == "SCHEMA_INVALID");
}

TEST_CASE("stepping a finished episode") {
  EpisodeService svc(builtin_templates(), ServiceConfig{});
  const std::string id = create(svc, "toggle_wifi", 1);
  const std::string tab = "<think>.</think><answer>{\"type\":\"key_press\",\"key\":\"Tab\"}</answer>";
  bool done = false;
  for (int i = 0; i < 100 && !done; ++i) done = parse(step(svc, id, tab))["body"]["done"].get<bool>();
  REQUIRE(done);
  const auto r = step(svc, id, tab);
  CHECK(r.status == 409);
  CHECK(error_code(r) == "EPISODE_FINISHED");
}

TEST_CASE("request ids make steps idempotent") {
  EpisodeService svc(builtin_templates(), ServiceConfig{});
  const std::string id = create(svc);
  const auto a = step(svc, id, kFirstTurn, "req-1");
  const auto b = step(svc, id, kFirstTurn, "req-1");
  CHECK(a.status == 200);
  CHECK(a.body == b.body);
  CHECK(parse(svc.handle("GET", "/v1/episodes/" + id, ""))["body"]["t"] == 2);
  const auto conflict = step(svc, id, "<think>x</think>", "req-1");
  CHECK(conflict.status == 409);
  CHECK(error_code(conflict) == "IDEMPOTENCY_CONFLICT");
  // no request id: never cached
  step(svc, id, "<think>x</think>");
  step(svc, id, "<think>x</think>");
  CHECK(parse(svc.handle("GET", "/v1/episodes/" + id, ""))["body"]["t"] == 4);

  const auto c1 = svc.handle("POST", "/v1/episodes", envelope({{"template_id", "export_pdf"}}, "create-1"));
  const auto c2 = svc.handle("POST", "/v1/episodes", envelope({{"template_id", "export_pdf"}}, "create-1"));
  CHECK(c1.body == c2.body);
  CHECK(svc.episode_count() == 2);
}

TEST_CASE("envelope errors") {
  ServiceConfig cfg;
  cfg.max_body_bytes = 256;
  EpisodeService svc(builtin_templates(), cfg);
  const auto big = svc.handle("POST", "/v1/episodes", envelope({{"template_id", std::string(400, 'x')}}));
  CHECK(big.status == 413);
  CHECK(error_code(big) == "PAYLOAD_TOO_LARGE");

  const auto v2 = svc.handle("POST", "/v1/episodes", envelope({{"template_id", "export_pdf"}}, "r", 2));
  CHECK(v2.status == 400);
  CHECK(error_code(v2) == "PROTOCOL_MISMATCH");
  CHECK(parse(v2).at("request_id") == "r");
  CHECK(error_code(svc.handle("POST", "/v1/episodes", R"({"body":{"template_id":"export_pdf"}})")) == "SCHEMA_INVALID");
  CHECK(error_code(svc.handle("POST", "/v1/episodes", "{not json")) == "SCHEMA_INVALID");
  CHECK(error_code(svc.handle("POST", "/v1/nowhere", envelope(json::object()))) == "NOT_FOUND");
  CHECK(svc.handle("DELETE", "/v1/episodes", "").status == 405);

  const auto health = parse(svc.handle("GET", "/v1/health", ""));
  CHECK(health["body"]["status"] == "ok");
  CHECK(health["body"]["provider"] == "stub");
  const auto templates = parse(svc.handle("GET", "/v1/templates", ""));
  CHECK(templates["body"]["templates"].size() == builtin_templates().all().size());
}

TEST_CASE("score endpoint") {
  EpisodeService svc(builtin_templates(), ServiceConfig{});
  const auto rec = gold_record("export_pdf", 3);
  const std::string line = trajectory_to_json(rec).dump();

  const auto r = parse(svc.handle("POST", "/v1/score", envelope({{"trajectory", line}})));
  REQUIRE(r["error"].is_null());
  CHECK(r["body"]["R"] == rec.R);
  CHECK(r["body"]["matches_stored"] == true);

  RewardConfig k1;
  k1.window_k = 1;
  RewardConfig k4;
  k4.window_k = 4;
  const auto a = parse(svc.handle("POST", "/v1/score", envelope({{"trajectory", line}, {"config", k1.to_json()}})));
  const auto b = parse(svc.handle("POST", "/v1/score", envelope({{"trajectory", line}, {"config", k4.to_json()}})));
  CHECK(a["body"]["R"] == b["body"]["R"]);
  CHECK(a["body"]["windowed"] != b["body"]["windowed"]);

  auto broken = json::parse(line);
  broken["steps"][1].erase("t");
  const auto bad = svc.handle("POST", "/v1/score", envelope({{"trajectory", broken}}));
  CHECK(error_code(bad) == "SCHEMA_INVALID");
  CHECK(parse(bad)["error"]["message"].get<std::string>().find("steps[1].t") != std::string::npos);
}

TEST_CASE("a false milestone claim shows up once in the breakdown") {
  const auto& t = builtin_templates().at("export_pdf");
  Episode ep(t, 4, HarnessConfig{}, std::make_shared<StubCritiqueProvider>());
  ScriptedAgent gold(AgentSpec::parse("gold"), 4);
  ep.step_raw("<think>[MILESTONE: MenuOpened] [MILESTONE: ExportConfirmed]</think>"
              "<answer>{\"type\":\"click\",\"target\":\"file_menu_button\"}</answer>");
  while (!ep.done()) ep.step_raw(gold.next_turn(ep));
  const auto rec = ep.record("gold");
  const auto s = score_trajectory(json::parse(trajectory_to_json(rec).dump()), std::nullopt, builtin_templates());
  int penalties = 0;
  for (const auto& st : s.at("steps")) {
    for (const auto& m : st.at("milestone_events")) {
      if (m.at("value") == -0.5) {
        ++penalties;
        CHECK(m.at("outcome") == "false_claim");
        CHECK(m.at("label") == "ExportConfirmed");
      }
    }
  }
  CHECK(penalties == 1);
  CHECK(s.at("matches_stored") == true);
}

TEST_CASE("service config") {
  CHECK_THROWS_AS(ServiceConfig::from_json(json{{"prot", 1}}), ConfigError);
  CHECK_THROWS_AS(ServiceConfig::from_json(json{{"port", 70000}}), ConfigError);
  const auto c = ServiceConfig::from_json(json{{"port", 9000}, {"reward", {{"window_k", 2}}}});
  CHECK(c.port == 9000);
  CHECK(c.reward.window_k == 2);
  ::setenv("GUIRL_WINDOW_K", "8", 1);
  ::setenv("GUIRL_ANNEAL_STEP", "100", 1);
  ServiceConfig e;
  e.apply_env();
  CHECK(e.reward.window_k == 8);
  CHECK(e.reward.schedule.global_step == 100);
  ::setenv("GUIRL_WINDOW_K", "zero", 1);
  CHECK_THROWS_AS(e.apply_env(), ConfigError);
  ::unsetenv("GUIRL_WINDOW_K");
  ::unsetenv("GUIRL_ANNEAL_STEP");
}

TEST_CASE("HTTP server handles 64 concurrent episodes") {
  ServiceConfig cfg;
  cfg.threads = 16;
  EpisodeService svc(builtin_templates(), cfg);
  HttpServer server(svc);
  const int port = server.bind("127.0.0.1", 0);
  server.start();

  const auto& all = builtin_templates().all();
  std::atomic<int> failures{0};
  std::mutex fail_mu;
  std::string first_failure;
  auto fail = [&](const std::string& why) {
    std::lock_guard lock(fail_mu);
    if (failures++ == 0) first_failure = why;
  };
  std::vector<std::thread> workers;
  for (int w = 0; w < 64; ++w) {
    workers.emplace_back([&, w] {
      httplib::Client c("127.0.0.1", port);
      c.set_read_timeout(30, 0);
      const auto& t = all[static_cast<std::size_t>(w) % all.size()];
      const std::uint64_t seed = 100 + static_cast<std::uint64_t>(w);
      auto res = c.Post("/v1/episodes", envelope({{"template_id", t.id}, {"seed", seed}}), "application/json");
      if (!res || res->status != 201) {
        fail(res ? "create status " + std::to_string(res->status) : "create: " + httplib::to_string(res.error()));
        return;
      }
      const std::string id = json::parse(res->body)["body"]["episode_id"];
      Episode local(t, seed, HarnessConfig{}, std::make_shared<StubCritiqueProvider>(), id);
      ScriptedAgent agent(AgentSpec::parse(w % 2 ? "noisy:0.4:0.1:0.1" : "gold"), seed);
      while (!local.done()) {
        const std::string raw = agent.next_turn(local);
        const std::string expect = json::parse(local.step_raw(raw).to_json().dump()).dump();
        auto r = c.Post(("/v1/episodes/" + id + "/step").c_str(), envelope({{"raw_turn", raw}}), "application/json");
        if (!r) {
          fail("step: " + httplib::to_string(r.error()));
          return;
        }
        if (r->status != 200 || json::parse(r->body)["body"].dump() != expect) {
          fail("step " + id + " diverged: " + r->body);
          return;
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  CAPTURE(first_failure);
  CHECK(failures.load() == 0);
  CHECK(svc.episode_count() == 64);

  // interleaved steps against one episode are serialised
  httplib::Client c("127.0.0.1", port);
  auto res = c.Post("/v1/episodes", envelope({{"template_id", "web_register"}, {"seed", 1}}), "application/json");
  REQUIRE(res);
  const std::string id = json::parse(res->body)["body"]["episode_id"];
  const std::string tab = "<think>.</think><answer>{\"type\":\"key_press\",\"key\":\"Tab\"}</answer>";
  std::vector<std::thread> hammer;
  std::mutex mu;
  std::vector<int> ts;
  for (int i = 0; i < 8; ++i) {
    hammer.emplace_back([&] {
      httplib::Client hc("127.0.0.1", port);
      auto r = hc.Post(("/v1/episodes/" + id + "/step").c_str(), envelope({{"raw_turn", tab}}), "application/json");
      if (r && r->status == 200) {
        std::lock_guard lock(mu);
        ts.push_back(json::parse(r->body)["body"]["t"].get<int>());
      }
    });
  }
  for (auto& h : hammer) h.join();
  std::sort(ts.begin(), ts.end());
  for (std::size_t i = 0; i < ts.size(); ++i) CHECK(ts[i] == static_cast<int>(i) + 1);
  server.stop();
}

TEST_CASE("cli exit codes and outputs") {
  TempDir dir("cli");
  const std::string data = dir.file("d.jsonl");

  const auto gen = cli(dir, "gen --template export_pdf --agent gold --count 10 --seed 1 --out " + data);
  CHECK(gen.code == 0);
  CHECK(testsupport::count_lines(data) == 10);
  CHECK(json::parse(gen.out)["total_count"] == 10);

  const auto adv = cli(dir, "advantage --in " + data + " --group-by template");
  CHECK(adv.code == 0);
  for (const auto& g : json::parse(adv.out)["groups"]) CHECK(std::fabs(g["sum"].get<double>()) <= 1e-9);

  const auto score = cli(dir, "score --in " + data);
  CHECK(score.code == 0);
  const auto report = json::parse(score.out);
  CHECK(report["count"] == 10);
  for (const auto& s : report["scores"]) CHECK(s["matches_stored"] == true);

  const auto stats = cli(dir, "stats --in " + data + " --filter completed");
  CHECK(stats.code == 0);
  CHECK(json::parse(stats.out)["total_count"] == 10);

  const std::string bad = dir.file("bad.jsonl");
  {
    std::ofstream out(bad);
    out << testsupport::read_file(data).substr(0, 200) << "\n";
  }
  const auto bad_score = cli(dir, "score --in " + bad);
  CHECK(bad_score.code == 1);
  CHECK(bad_score.err.find("SCHEMA_INVALID") != std::string::npos);
  CHECK(std::count(bad_score.err.begin(), bad_score.err.end(), '\n') == 1);

  const std::string untouched = dir.file("never.jsonl");
  const auto unknown = cli(dir, "gen --template export_pdf --bogus --out " + untouched);
  CHECK(unknown.code == 1);
  CHECK_FALSE(std::filesystem::exists(untouched));

  const std::string one = dir.file("one.jsonl");
  const auto run = cli(dir, "run --template toggle_wifi --agent lazy --seed 5 --out " + one);
  CHECK(run.code == 0);
  CHECK(run.out == one + "\n");
  CHECK(testsupport::count_lines(one) == 1);

  CHECK(cli(dir, "run --template nope --out " + one).code == 1);
  CHECK(cli(dir, "").code == 1);
}
