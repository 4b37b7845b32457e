#include "httplib.h"

#include "guirl/critique.hpp"
#include "guirl/errors.hpp"

namespace guirl {

HttpCritiqueProvider::HttpCritiqueProvider(std::string endpoint, std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), timeout_(timeout) {
  constexpr std::string_view kScheme = "http://";
  if (endpoint_.rfind(kScheme, 0) != 0) {
    throw ConfigError("critique endpoint must start with http://: '" + endpoint_ + "'");
  }
  const std::string rest = endpoint_.substr(kScheme.size());
  const auto slash = rest.find('/');
  host_port_ = rest.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : rest.substr(slash);
  if (host_port_.empty()) throw ConfigError("critique endpoint has no host: '" + endpoint_ + "'");
}

LdpScore HttpCritiqueProvider::critique(const CritiqueRequest& request) {
  httplib::Client client("http://" + host_port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  auto res = client.Post(path_, request.to_json().dump(), "application/json");
  if (!res) throw ProviderError("critique endpoint unreachable: " + httplib::to_string(res.error()));
  if (res->status != 200) throw ProviderError("critique endpoint returned HTTP " + std::to_string(res->status));
  const auto body = nlohmann::json::parse(res->body, nullptr, false);
  if (body.is_discarded()) throw ProviderError("critique endpoint returned malformed JSON");
  return ldp_from_json(body);
}

}  // namespace guirl
