#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>

#include "guirl/episode.hpp"
#include "guirl/template.hpp"

namespace guirl {

inline constexpr int kProtocolVersion = 1;

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string provider_endpoint;  // empty: stub critic
  int provider_timeout_ms = 5000;
  std::string principles_file;    // empty: built-in catalog
  RewardConfig reward;
  std::size_t max_body_bytes = 1 << 20;
  std::size_t max_episodes = 4096;
  std::size_t idempotency_cache = 4096;
  int threads = 32;

  // Keys as above, all optional. Throws ConfigError.
  static ServiceConfig from_json(const nlohmann::json& j);
  static ServiceConfig load_file(const std::string& path);
  // GUIRL_PORT, GUIRL_PROVIDER_ENDPOINT, GUIRL_ANNEAL_STEP, GUIRL_WINDOW_K.
  void apply_env();
  ordered_json to_json() const;
};

std::shared_ptr<CritiqueProvider> make_provider(const ServiceConfig& config);

struct HttpResponse {
  int status = 200;
  std::string body;  // a response envelope
};

// Stateless scoring of one trajectory line: re-executes it with the stub
// critic under `config` (the record's own when absent). Throws SchemaError,
// LookupError or ReplayMismatch.
ordered_json score_trajectory(const nlohmann::json& line, const std::optional<RewardConfig>& config,
                              const TemplateRegistry& templates);

// Transport-independent request handling. Thread-safe: requests for distinct
// episodes run in parallel, steps of one episode are serialised.
class EpisodeService {
 public:
  EpisodeService(const TemplateRegistry& templates, ServiceConfig config,
                 std::shared_ptr<CritiqueProvider> provider = nullptr);

  HttpResponse handle(std::string_view method, std::string_view path, std::string_view body);

  std::size_t episode_count() const;
  const ServiceConfig& config() const { return config_; }

 private:
  struct Slot {
    std::mutex mu;
    std::unique_ptr<Episode> episode;
  };
  struct Cached {
    std::uint64_t body_hash = 0;
    HttpResponse response;
  };

  ordered_json create_episode(const nlohmann::json& body);
  ordered_json get_episode(const std::string& id);
  ordered_json list_templates() const;
  ordered_json health() const;
  std::shared_ptr<Slot> slot(const std::string& id) const;

  std::optional<HttpResponse> cached(const std::string& key, std::uint64_t hash);
  void remember(const std::string& key, std::uint64_t hash, const HttpResponse& response);

  const TemplateRegistry& templates_;
  ServiceConfig config_;
  HarnessConfig harness_;
  std::shared_ptr<CritiqueProvider> provider_;

  mutable std::shared_mutex episodes_mu_;
  std::map<std::string, std::shared_ptr<Slot>> episodes_;
  std::uint64_t next_id_ = 1;

  std::mutex create_mu_;
  std::mutex cache_mu_;
  std::unordered_map<std::string, Cached> cache_;
  std::deque<std::string> cache_order_;
};

// HTTP face of an EpisodeService.
class HttpServer {
 public:
  explicit HttpServer(EpisodeService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Returns the bound port; port 0 picks a free one. Throws ConfigError.
  int bind(const std::string& host, int port);
  void listen();  // blocks until stop()
  void start();   // listen on a background thread
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace guirl
