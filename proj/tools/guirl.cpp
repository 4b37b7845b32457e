#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "guirl/agent.hpp"
#include "guirl/errors.hpp"
#include "guirl/service.hpp"
#include "guirl/store.hpp"

namespace {

using namespace guirl;
using json = nlohmann::json;

struct Options {
  std::string config_file;
  std::string templates_dir;

  std::string template_id;
  std::string agent = "gold";
  std::uint64_t seed = 1;
  int count = 1;
  std::string out;
  std::string in;
  std::string preset;
  bool grid = false;

  std::optional<int> window_k;
  std::optional<long> anneal_step;
  std::string group_by = "template";
  bool normalize = false;
  std::vector<std::string> filters;

  std::optional<int> port;
  std::string host;
};

class UserError : public Error {
 public:
  explicit UserError(const std::string& m) : Error("USAGE", m) {}
};

ServiceConfig load_config(const Options& o) {
  ServiceConfig c = o.config_file.empty() ? ServiceConfig{} : ServiceConfig::load_file(o.config_file);
  c.apply_env();
  if (o.window_k) c.reward.window_k = *o.window_k;
  if (o.anneal_step) c.reward.schedule.global_step = *o.anneal_step;
  if (o.port) c.port = *o.port;
  if (!o.host.empty()) c.host = o.host;
  c.reward.validate();
  return c;
}

TemplateRegistry load_templates(const Options& o) {
  return TemplateRegistry::load_dir(o.templates_dir.empty() ? default_template_dir() : o.templates_dir);
}

HarnessConfig harness_config(const ServiceConfig& c) {
  HarnessConfig h;
  h.reward = c.reward;
  if (!c.principles_file.empty()) h.principles = PrincipleSet::load_file(c.principles_file);
  return h;
}

void print(const ordered_json& j) { std::cout << j.dump(2, ' ', false, json::error_handler_t::replace) << "\n"; }

int cmd_run(const Options& o) {
  const auto templates = load_templates(o);
  const auto cfg = load_config(o);
  const TaskTemplate& t = templates.at(o.template_id);
  ScriptedAgent agent(AgentSpec::parse(o.agent), o.seed);
  TrajectoryRecord rec = run_episode(t, o.seed, harness_config(cfg), make_provider(cfg), agent);
  TrajectoryStore store(o.out, o.grid);
  rec.id = store.append(rec);
  std::cerr << t.id << " seed " << o.seed << ": T=" << rec.T << " R=" << rec.R << " " << rec.done_reason << " ("
            << rec.credited.size() << "/" << t.subtasks.size() << " credited), id " << rec.id << "\n";
  std::cout << o.out << "\n";
  return 0;
}

int cmd_gen(const Options& o) {
  const auto templates = load_templates(o);
  const auto cfg = load_config(o);
  std::vector<GenerationEntry> entries;
  if (!o.preset.empty()) {
    if (o.preset != "desk") throw UserError("unknown preset '" + o.preset + "' (expected desk)");
    if (!o.template_id.empty()) throw UserError("--preset and --template are exclusive");
    entries = desk_preset();
  } else {
    if (o.template_id.empty()) throw UserError("gen needs --template or --preset");
    entries.push_back({o.template_id, AgentSpec::parse(o.agent), o.count});
  }
  TrajectoryStore store(o.out, o.grid);
  const auto start = std::chrono::steady_clock::now();
  const auto result = generate_dataset(templates, entries, o.seed, store, harness_config(cfg), make_provider(cfg));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cerr << "wrote " << result.ids.size() << " trajectories to " << o.out << " in " << secs << " s\n";
  print(result.manifest.to_json());
  return 0;
}

int cmd_score(const Options& o) {
  const auto templates = load_templates(o);
  std::optional<RewardConfig> override_cfg;
  if (o.window_k || o.anneal_step || !o.config_file.empty()) override_cfg = load_config(o).reward;

  std::ifstream in(o.in, std::ios::binary);
  if (!in) throw UserError(o.in + ": cannot open file");
  ordered_json scores = ordered_json::array();
  std::string line;
  int n = 0;
  double sum = 0.0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto j = json::parse(line, nullptr, false);
    try {
      if (j.is_discarded()) throw SchemaError("(root): not valid JSON");
      const auto s = score_trajectory(j, override_cfg, templates);
      sum += s.at("R").get<double>();
      scores.push_back({{"line", n},
                        {"id", s.at("id")},
                        {"template_id", s.at("template_id")},
                        {"R", s.at("R")},
                        {"stored_R", s.at("stored_R")},
                        {"matches_stored", s.at("matches_stored")},
                        {"windowed", s.at("windowed")}});
    } catch (const Error& e) {
      throw SchemaError(o.in + ": line " + std::to_string(n) + ": " + e.code() + ": " + e.what());
    }
  }
  print({{"file", o.in},
         {"count", scores.size()},
         {"mean_R", scores.empty() ? 0.0 : sum / static_cast<double>(scores.size())},
         {"scores", std::move(scores)}});
  return 0;
}

int cmd_stats(const Options& o) {
  auto records = TrajectoryStore::read_file(o.in);
  if (!o.filters.empty()) {
    std::set<QualityRule> rules;
    for (const auto& f : o.filters) {
      const auto r = parse_quality_rule(f);
      if (!r) throw UserError("unknown filter rule '" + f + "'");
      rules.insert(*r);
    }
    const auto templates = load_templates(o);
    records = filter_quality(records, rules, templates);
  }
  print(dataset_stats(records).to_json());
  return 0;
}

int cmd_advantage(const Options& o) {
  const auto records = TrajectoryStore::read_file(o.in);
  std::map<std::string, std::vector<const TrajectoryRecord*>> groups;
  for (const auto& r : records) {
    const std::string key = o.group_by == "template" ? r.template_id : r.template_id + "/" + r.agent;
    groups[key].push_back(&r);
  }
  ordered_json out = ordered_json::array();
  for (const auto& [key, members] : groups) {
    ordered_json g{{"group", key}, {"count", members.size()}};
    if (members.size() < 2) {
      g["skipped"] = "a group needs at least two trajectories";
      out.push_back(std::move(g));
      continue;
    }
    std::vector<double> returns;
    for (const auto* r : members) returns.push_back(r->R);
    const auto adv = group_advantages(returns, o.normalize);
    ordered_json entries = ordered_json::array();
    double total = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
      entries.push_back({{"id", members[i]->id}, {"R", returns[i]}, {"advantage", adv.advantages[i]}});
      total += adv.advantages[i];
    }
    g["baseline"] = adv.baseline;
    g["scale"] = adv.scale;
    g["sum"] = total;
    g["entries"] = std::move(entries);
    out.push_back(std::move(g));
  }
  print({{"file", o.in}, {"group_by", o.group_by}, {"normalize", o.normalize}, {"groups", std::move(out)}});
  return 0;
}

HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int cmd_serve(const Options& o) {
  const auto templates = load_templates(o);
  const auto cfg = load_config(o);
  EpisodeService service(templates, cfg);
  HttpServer server(service);
  const int port = server.bind(cfg.host, cfg.port);
  std::cerr << "serving " << templates.all().size() << " templates on http://" << cfg.host << ":" << port
            << " (protocol " << kProtocolVersion << ")\n";
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.listen();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GUI episode harness and principle-constrained reward engine"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config_file, "JSON config file (service, reward, provider)");
  app.add_option("--templates", o.templates_dir, "Template directory (default: shipped templates)");

  auto* run = app.add_subcommand("run", "Run one episode with a scripted agent and append it to --out");
  run->add_option("--template", o.template_id, "Template id")->required();
  run->add_option("--agent", o.agent, "gold | lazy | noisy[:coord[:type:format]]");
  run->add_option("--seed", o.seed, "Episode seed");
  run->add_option("--out", o.out, "Trajectory JSONL file")->required();
  run->add_flag("--grid", o.grid, "Store full screen grids");

  auto* gen = app.add_subcommand("gen", "Generate trajectories with scripted agents");
  gen->add_option("--template", o.template_id, "Template id");
  gen->add_option("--agent", o.agent, "gold | lazy | noisy[:coord[:type:format]]");
  gen->add_option("--count", o.count, "Number of trajectories")->check(CLI::NonNegativeNumber);
  gen->add_option("--preset", o.preset, "Named generation plan (desk)");
  gen->add_option("--seed", o.seed, "Dataset seed");
  gen->add_option("--out", o.out, "Trajectory JSONL file")->required();
  gen->add_flag("--grid", o.grid, "Store full screen grids");

  auto* score = app.add_subcommand("score", "Rescore a trajectory file offline with the stub critic");
  score->add_option("--in", o.in, "Trajectory JSONL file")->required();
  score->add_option("--window-k", o.window_k, "Override the window size");
  score->add_option("--anneal-step", o.anneal_step, "Override the annealing step");

  auto* stats = app.add_subcommand("stats", "Print the dataset manifest of a trajectory file");
  stats->add_option("--in", o.in, "Trajectory JSONL file")->required();
  stats->add_option("--filter", o.filters,
                    "Quality rule: completed | no_format_penalty | no_safety_penalty | replay_verified");

  auto* adv = app.add_subcommand("advantage", "Group-relative advantages per template");
  adv->add_option("--in", o.in, "Trajectory JSONL file")->required();
  adv->add_option("--group-by", o.group_by, "template | template_agent")
      ->check(CLI::IsMember({"template", "template_agent"}));
  adv->add_flag("--normalize", o.normalize, "Divide by the group standard deviation");

  auto* serve = app.add_subcommand("serve", "Serve the episode protocol over HTTP");
  serve->add_option("--port", o.port, "Port (default 8080 or GUIRL_PORT)");
  serve->add_option("--host", o.host, "Bind address");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "guirl: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*run) return cmd_run(o);
    if (*gen) return cmd_gen(o);
    if (*score) return cmd_score(o);
    if (*stats) return cmd_stats(o);
    if (*adv) return cmd_advantage(o);
    if (*serve) return cmd_serve(o);
  } catch (const Error& e) {
    std::cerr << "guirl: " << e.code() << ": " << e.what() << "\n";
    return e.code() == "INTERNAL" ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "guirl: internal error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
