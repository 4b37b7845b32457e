#include "guirl/service.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

#include "guirl/errors.hpp"
#include "guirl/util.hpp"

namespace guirl {
namespace {

using json = nlohmann::json;

struct ServiceError : Error {
  ServiceError(std::string code, int status, const std::string& message)
      : Error(std::move(code), message), status(status) {}
  int status;
};

std::string dump(const ordered_json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

ordered_json envelope(const ordered_json& request_id, const ordered_json& body) {
  return ordered_json{{"protocol_version", kProtocolVersion}, {"request_id", request_id}, {"body", body}, {"error", nullptr}};
}

HttpResponse error_response(int status, const ordered_json& request_id, const std::string& code,
                             const std::string& message) {
  ordered_json e{{"protocol_version", kProtocolVersion},
                 {"request_id", request_id},
                 {"body", nullptr},
                 {"error", {{"code", code}, {"message", message}}}};
  return {status, dump(e)};
}

int status_for(const std::string& code) {
  if (code == "TEMPLATE_NOT_FOUND" || code == "EPISODE_NOT_FOUND" || code == "NOT_FOUND") return 404;
  if (code == "EPISODE_FINISHED" || code == "IDEMPOTENCY_CONFLICT") return 409;
  if (code == "PAYLOAD_TOO_LARGE") return 413;
  if (code == "METHOD_NOT_ALLOWED") return 405;
  if (code == "REPLAY_MISMATCH") return 422;
  if (code == "TOO_MANY_EPISODES") return 503;
  if (code == "INTERNAL" || code == "PROVIDER_FAILED") return 500;
  return 400;
}

std::vector<std::string> split_path(std::string_view path) {
  const auto q = path.find('?');
  if (q != std::string_view::npos) path = path.substr(0, q);
  std::vector<std::string> out;
  std::string cur;
  for (char c : path) {
    if (c == '/') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

const json& require(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) throw SchemaError(std::string("body.") + key + ": missing");
  return obj.at(key);
}

long env_long(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) throw std::out_of_range(name);
  char* end = nullptr;
  const long out = std::strtol(v, &end, 10);
  if (*end != '\0') throw ConfigError(std::string(name) + "='" + v + "' is not an integer");
  return out;
}

}  // namespace

ServiceConfig ServiceConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("service config: expected an object");
  static const std::vector<std::string> keys{"host",          "port",           "provider_endpoint",
                                             "provider_timeout_ms", "principles_file", "reward",
                                             "max_body_bytes", "max_episodes",   "idempotency_cache",
                                             "threads"};
  for (const auto& [k, _] : j.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) throw ConfigError("service config: unknown key '" + k + "'");
  }
  ServiceConfig c;
  try {
    if (j.contains("host")) c.host = j.at("host").get<std::string>();
    if (j.contains("port")) c.port = j.at("port").get<int>();
    if (j.contains("provider_endpoint")) c.provider_endpoint = j.at("provider_endpoint").get<std::string>();
    if (j.contains("provider_timeout_ms")) c.provider_timeout_ms = j.at("provider_timeout_ms").get<int>();
    if (j.contains("principles_file")) c.principles_file = j.at("principles_file").get<std::string>();
    if (j.contains("max_body_bytes")) c.max_body_bytes = j.at("max_body_bytes").get<std::size_t>();
    if (j.contains("max_episodes")) c.max_episodes = j.at("max_episodes").get<std::size_t>();
    if (j.contains("idempotency_cache")) c.idempotency_cache = j.at("idempotency_cache").get<std::size_t>();
    if (j.contains("threads")) c.threads = j.at("threads").get<int>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("service config: ") + e.what());
  }
  if (j.contains("reward")) {
    try {
      c.reward = RewardConfig::from_json(j.at("reward"));
    } catch (const SchemaError& e) {
      throw ConfigError(std::string("service config: reward: ") + e.what());
    }
  }
  if (c.port < 0 || c.port > 65535) throw ConfigError("service config: port out of range");
  if (c.threads < 1) throw ConfigError("service config: threads must be >= 1");
  c.reward.validate();
  return c;
}

ServiceConfig ServiceConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  const auto j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError(path + ": not valid JSON");
  return from_json(j);
}

void ServiceConfig::apply_env() {
  try {
    port = static_cast<int>(env_long("GUIRL_PORT"));
  } catch (const std::out_of_range&) {
  }
  if (const char* v = std::getenv("GUIRL_PROVIDER_ENDPOINT"); v && *v) provider_endpoint = v;
  try {
    reward.schedule.global_step = env_long("GUIRL_ANNEAL_STEP");
  } catch (const std::out_of_range&) {
  }
  try {
    reward.window_k = static_cast<int>(env_long("GUIRL_WINDOW_K"));
  } catch (const std::out_of_range&) {
  }
  if (port < 0 || port > 65535) throw ConfigError("GUIRL_PORT out of range");
  reward.validate();
}

ordered_json ServiceConfig::to_json() const {
  return ordered_json{{"host", host},
                      {"port", port},
                      {"provider_endpoint", provider_endpoint},
                      {"provider_timeout_ms", provider_timeout_ms},
                      {"principles_file", principles_file},
                      {"reward", reward.to_json()},
                      {"max_body_bytes", max_body_bytes},
                      {"max_episodes", max_episodes},
                      {"idempotency_cache", idempotency_cache},
                      {"threads", threads}};
}

std::shared_ptr<CritiqueProvider> make_provider(const ServiceConfig& config) {
  if (config.provider_endpoint.empty()) return std::make_shared<StubCritiqueProvider>();
  return std::make_shared<HttpCritiqueProvider>(config.provider_endpoint,
                                                std::chrono::milliseconds(config.provider_timeout_ms));
}

ordered_json score_trajectory(const json& line, const std::optional<RewardConfig>& config,
                              const TemplateRegistry& templates) {
  const TrajectoryRecord rec = trajectory_from_json(line);
  validate_trajectory(rec);
  if (!templates.find(rec.template_id)) {
    throw ServiceError("TEMPLATE_NOT_FOUND", 404, "unknown template '" + rec.template_id + "'");
  }
  const RewardConfig cfg = config.value_or(rec.config);
  cfg.validate();
  const TrajectoryRecord out = rescore(rec, templates, cfg);
  ordered_json steps = ordered_json::array();
  ordered_json windowed = ordered_json::array();
  for (const auto& s : out.steps) {
    steps.push_back(step_reward_to_json(s.reward));
    windowed.push_back(s.reward.windowed);
  }
  return ordered_json{{"id", rec.id},
                      {"template_id", rec.template_id},
                      {"config", cfg.to_json()},
                      {"steps", std::move(steps)},
                      {"windowed", std::move(windowed)},
                      {"R", out.R},
                      {"stored_R", rec.R},
                      {"matches_stored", out.R == rec.R}};
}

EpisodeService::EpisodeService(const TemplateRegistry& templates, ServiceConfig config,
                               std::shared_ptr<CritiqueProvider> provider)
    : templates_(templates), config_(std::move(config)), provider_(std::move(provider)) {
  config_.reward.validate();
  harness_.reward = config_.reward;
  if (!config_.principles_file.empty()) harness_.principles = PrincipleSet::load_file(config_.principles_file);
  if (!provider_) provider_ = make_provider(config_);
}

std::size_t EpisodeService::episode_count() const {
  std::shared_lock lock(episodes_mu_);
  return episodes_.size();
}

std::shared_ptr<EpisodeService::Slot> EpisodeService::slot(const std::string& id) const {
  std::shared_lock lock(episodes_mu_);
  const auto it = episodes_.find(id);
  if (it == episodes_.end()) throw ServiceError("EPISODE_NOT_FOUND", 404, "no episode '" + id + "'");
  return it->second;
}

std::optional<HttpResponse> EpisodeService::cached(const std::string& key, std::uint64_t hash) {
  std::lock_guard lock(cache_mu_);
  const auto it = cache_.find(key);
  if (it == cache_.end()) return std::nullopt;
  if (it->second.body_hash != hash) {
    throw ServiceError("IDEMPOTENCY_CONFLICT", 409, "request id reused with a different body");
  }
  return it->second.response;
}

void EpisodeService::remember(const std::string& key, std::uint64_t hash, const HttpResponse& response) {
  std::lock_guard lock(cache_mu_);
  if (cache_.count(key)) return;
  cache_[key] = Cached{hash, response};
  cache_order_.push_back(key);
  while (cache_order_.size() > config_.idempotency_cache) {
    cache_.erase(cache_order_.front());
    cache_order_.pop_front();
  }
}

ordered_json EpisodeService::create_episode(const json& body) {
  const auto& tid = require(body, "template_id");
  if (!tid.is_string()) throw SchemaError("body.template_id: expected a string");
  std::uint64_t seed = 0;
  if (body.contains("seed")) {
    const auto& s = body.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      throw SchemaError("body.seed: expected a non-negative integer");
    }
    seed = s.get<std::uint64_t>();
  }
  const auto* tmpl = templates_.find(tid.get<std::string>());
  if (!tmpl) throw ServiceError("TEMPLATE_NOT_FOUND", 404, "unknown template '" + tid.get<std::string>() + "'");

  auto s = std::make_shared<Slot>();
  std::string id;
  {
    std::unique_lock lock(episodes_mu_);
    if (episodes_.size() >= config_.max_episodes) {
      throw ServiceError("TOO_MANY_EPISODES", 503, "episode limit reached");
    }
    id = "ep-" + std::to_string(next_id_++);
    s->episode = std::make_unique<Episode>(*tmpl, seed, harness_, provider_, id);
    episodes_[id] = s;
  }
  return ordered_json{{"episode_id", id}, {"observation", s->episode->observation().to_json()}};
}

ordered_json EpisodeService::get_episode(const std::string& id) {
  auto s = slot(id);
  std::lock_guard lock(s->mu);
  const Episode& ep = *s->episode;
  std::vector<std::string> credited(ep.credited().begin(), ep.credited().end());
  ordered_json totals = ordered_json::array();
  for (const auto& st : ep.steps()) totals.push_back(st.reward.total);
  return ordered_json{{"episode_id", id},
                      {"template_id", ep.task().id},
                      {"seed", ep.seed()},
                      {"t", ep.t()},
                      {"steps", ep.steps().size()},
                      {"step_totals", std::move(totals)},
                      {"credited", credited},
                      {"done", ep.done()},
                      {"done_reason", ep.done() ? ordered_json(ep.done_reason()) : ordered_json(nullptr)},
                      {"observation", ep.observation().to_json()}};
}

ordered_json EpisodeService::list_templates() const {
  ordered_json out = ordered_json::array();
  for (const auto& t : templates_.all()) {
    ordered_json labels = ordered_json::array();
    for (const auto& s : t.subtasks) labels.push_back(s.label);
    out.push_back({{"id", t.id},
                   {"platform", platform_name(t.platform)},
                   {"category", t.category},
                   {"goal", t.goal},
                   {"tau_star", t.tau_star},
                   {"subtasks", std::move(labels)}});
  }
  return ordered_json{{"templates", std::move(out)}};
}

ordered_json EpisodeService::health() const {
  return ordered_json{{"status", "ok"}, {"protocol_version", kProtocolVersion}, {"episodes", episode_count()},
                      {"provider", provider_->name()}};
}

HttpResponse EpisodeService::handle(std::string_view method, std::string_view path, std::string_view body) {
  ordered_json request_id = nullptr;
  try {
    const auto parts = split_path(path);
    if (parts.size() < 2 || parts[0] != "v1") throw ServiceError("NOT_FOUND", 404, "no route " + std::string(path));

    if (method == "GET") {
      if (parts.size() == 2 && parts[1] == "health") return {200, dump(envelope(nullptr, health()))};
      if (parts.size() == 2 && parts[1] == "templates") return {200, dump(envelope(nullptr, list_templates()))};
      if (parts.size() == 3 && parts[1] == "episodes") return {200, dump(envelope(nullptr, get_episode(parts[2])))};
      throw ServiceError("NOT_FOUND", 404, "no route GET " + std::string(path));
    }
    if (method != "POST") throw ServiceError("METHOD_NOT_ALLOWED", 405, "method " + std::string(method));

    const bool is_create = parts.size() == 2 && parts[1] == "episodes";
    const bool is_step = parts.size() == 4 && parts[1] == "episodes" && parts[3] == "step";
    const bool is_score = parts.size() == 2 && parts[1] == "score";
    if (!is_create && !is_step && !is_score) throw ServiceError("NOT_FOUND", 404, "no route POST " + std::string(path));

    if (body.size() > config_.max_body_bytes) {
      throw ServiceError("PAYLOAD_TOO_LARGE", 413,
                         "body of " + std::to_string(body.size()) + " bytes exceeds " +
                             std::to_string(config_.max_body_bytes));
    }
    const auto env = json::parse(body, nullptr, false);
    if (env.is_discarded()) throw SchemaError("(root): not valid JSON");
    if (!env.is_object()) throw SchemaError("(root): expected an envelope object");
    if (env.contains("request_id")) {
      const auto& rid = env.at("request_id");
      if (!rid.is_string() && !rid.is_null()) throw SchemaError("request_id: expected a string");
      request_id = rid;
    }
    if (!env.contains("protocol_version")) throw SchemaError("protocol_version: missing");
    const auto& pv = env.at("protocol_version");
    if (!pv.is_number_integer() || pv.get<long long>() != kProtocolVersion) {
      throw ServiceError("PROTOCOL_MISMATCH", 400,
                         "protocol_version " + pv.dump() + " is not supported (server speaks " +
                             std::to_string(kProtocolVersion) + ")");
    }
    if (!env.contains("body") || !env.at("body").is_object()) throw SchemaError("body: expected an object");
    const json& req = env.at("body");

    if (is_score) {
      const auto& line = require(req, "trajectory");
      json parsed = line;
      if (line.is_string()) {
        parsed = json::parse(line.get<std::string>(), nullptr, false);
        if (parsed.is_discarded()) throw SchemaError("body.trajectory: not valid JSON");
      }
      std::optional<RewardConfig> cfg;
      if (req.contains("config") && !req.at("config").is_null()) {
        try {
          cfg = RewardConfig::from_json(req.at("config"));
        } catch (const SchemaError& e) {
          throw SchemaError(std::string("body.config: ") + e.what());
        }
      }
      try {
        return {200, dump(envelope(request_id, score_trajectory(parsed, cfg, templates_)))};
      } catch (const ServiceError&) {
        throw;
      } catch (const SchemaError& e) {
        throw SchemaError(std::string("body.trajectory: ") + e.what());
      }
    }

    const std::string key = request_id.is_string() ? std::string(method) + " " + std::string(path) + " " +
                                                         request_id.get<std::string>()
                                                   : std::string();
    const std::uint64_t hash = fnv1a64(body);
    if (!key.empty()) {
      if (auto hit = cached(key, hash)) return *hit;
    }

    HttpResponse out;
    if (is_create) {
      std::lock_guard lock(create_mu_);
      if (!key.empty()) {
        if (auto hit = cached(key, hash)) return *hit;
      }
      out = {201, dump(envelope(request_id, create_episode(req)))};
      if (!key.empty()) remember(key, hash, out);
      return out;
    }

    auto s = slot(parts[2]);
    std::lock_guard lock(s->mu);
    if (!key.empty()) {
      if (auto hit = cached(key, hash)) return *hit;
    }
    const auto& raw = require(req, "raw_turn");
    if (!raw.is_string()) throw SchemaError("body.raw_turn: expected a string");
    try {
      out = {200, dump(envelope(request_id, s->episode->step_raw(raw.get<std::string>()).to_json()))};
    } catch (const LifecycleError& e) {
      out = error_response(409, request_id, e.code(), e.what());
    }
    if (!key.empty()) remember(key, hash, out);
    return out;
  } catch (const ServiceError& e) {
    return error_response(e.status, request_id, e.code(), e.what());
  } catch (const LookupError& e) {
    return error_response(404, request_id, "TEMPLATE_NOT_FOUND", e.what());
  } catch (const Error& e) {
    return error_response(status_for(e.code()), request_id, e.code(), e.what());
  } catch (const std::exception& e) {
    return error_response(500, request_id, "INTERNAL", e.what());
  }
}

}  // namespace guirl
