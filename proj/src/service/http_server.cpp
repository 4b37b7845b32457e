#define CPPHTTPLIB_LISTEN_BACKLOG 256
#include "httplib.h"

#include <thread>

#include "guirl/errors.hpp"
#include "guirl/service.hpp"

namespace guirl {

struct HttpServer::Impl {
  EpisodeService& service;
  httplib::Server server;
  std::thread thread;

  explicit Impl(EpisodeService& s) : service(s) {}
};

HttpServer::HttpServer(EpisodeService& service) : impl_(std::make_unique<Impl>(service)) {
  auto& svr = impl_->server;
  const int threads = service.config().threads;
  svr.new_task_queue = [threads] { return new httplib::ThreadPool(static_cast<std::size_t>(threads)); };
  svr.set_payload_max_length(service.config().max_body_bytes * 4 + 1024);

  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    const HttpResponse out = impl_->service.handle(req.method, req.path, req.body);
    res.status = out.status;
    res.set_content(out.body, "application/json");
  };
  svr.Get(R"(/v1/.*)", forward);
  svr.Post(R"(/v1/.*)", forward);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  auto& svr = impl_->server;
  if (port == 0) {
    const int bound = svr.bind_to_any_port(host);
    if (bound < 0) throw ConfigError("cannot bind " + host);
    return bound;
  }
  if (!svr.bind_to_port(host, port)) throw ConfigError("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::start() {
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace guirl
