#include "vexa/http.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "vexa/error.hpp"

namespace vexa::http {

Endpoint parse_base_url(std::string_view url) {
  Endpoint ep;
  const auto sep = url.find("://");
  if (sep == std::string_view::npos) {
    throw Error(ErrorCode::ConfigError, "base_url '" + std::string(url) + "' has no scheme");
  }
  ep.scheme = std::string(url.substr(0, sep));
  if (ep.scheme != "http" && ep.scheme != "https") {
    throw Error(ErrorCode::ConfigError, "unsupported scheme in '" + std::string(url) + "'");
  }
  std::string_view rest = url.substr(sep + 3);
  const auto slash = rest.find('/');
  std::string_view authority = rest.substr(0, slash);
  if (slash != std::string_view::npos) ep.path_prefix = std::string(rest.substr(slash));
  while (!ep.path_prefix.empty() && ep.path_prefix.back() == '/') ep.path_prefix.pop_back();

  ep.port = ep.scheme == "https" ? 443 : 80;
  const auto colon = authority.rfind(':');
  if (colon != std::string_view::npos) {
    try {
      ep.port = std::stoi(std::string(authority.substr(colon + 1)));
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, "bad port in '" + std::string(url) + "'");
    }
    authority = authority.substr(0, colon);
  }
  if (authority.empty()) throw Error(ErrorCode::ConfigError, "no host in '" + std::string(url) + "'");
  ep.host = std::string(authority);
  return ep;
}

std::string resolve_api_key(const ClientConfig& config) {
  if (config.api_key_env_var.empty()) return {};
  const char* value = std::getenv(config.api_key_env_var.c_str());
  if (value == nullptr || *value == '\0') {
    throw Error(ErrorCode::AuthError,
                "environment variable " + config.api_key_env_var + " is not set");
  }
  return value;
}

namespace {

struct Attempt {
  enum class Kind { Ok, Retry, Fail } kind;
  ErrorCode code = ErrorCode::Transport;
  std::string detail;
  nlohmann::json body;
};

Attempt send_once(const Endpoint& ep, const ClientConfig& config, const std::string& path,
                  const std::string& payload, const std::string& api_key) {
  const auto secs = config.timeout.count() / 1000;
  const auto usecs = (config.timeout.count() % 1000) * 1000;
  auto run = [&](auto& client) -> Attempt {
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      const auto err = res.error();
      const bool timed_out = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
      return {Attempt::Kind::Retry, timed_out ? ErrorCode::Timeout : ErrorCode::Transport,
              httplib::to_string(err), {}};
    }
    const int status = res->status;
    if (status == 401 || status == 403) {
      return {Attempt::Kind::Fail, ErrorCode::AuthError, "HTTP " + std::to_string(status), {}};
    }
    if (status == 429) return {Attempt::Kind::Retry, ErrorCode::RateLimited, "HTTP 429", {}};
    if (status >= 500) {
      return {Attempt::Kind::Retry, ErrorCode::Transport, "HTTP " + std::to_string(status), {}};
    }
    if (status < 200 || status >= 300) {
      return {Attempt::Kind::Fail, ErrorCode::Transport,
              "HTTP " + std::to_string(status) + ": " + res->body, {}};
    }
    try {
      return {Attempt::Kind::Ok, ErrorCode::Transport, {}, nlohmann::json::parse(res->body)};
    } catch (const nlohmann::json::parse_error& e) {
      return {Attempt::Kind::Fail, ErrorCode::BadResponse, e.what(), {}};
    }
  };

  if (ep.scheme == "https") {
#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
    httplib::SSLClient client(ep.host, ep.port);
    return run(client);
#else
    return {Attempt::Kind::Fail, ErrorCode::ConfigError, "built without TLS support", {}};
#endif
  }
  httplib::Client client(ep.host, ep.port);
  return run(client);
}

}  // namespace

nlohmann::json post_json(const ClientConfig& config, std::string_view path,
                         const nlohmann::json& body) {
  if (config.timeout.count() <= 0) throw Error(ErrorCode::ConfigError, "timeout must be > 0");
  const Endpoint ep = parse_base_url(config.base_url);
  const std::string api_key = resolve_api_key(config);
  const std::string full_path = ep.path_prefix + std::string(path);
  const std::string payload = body.dump();

  auto backoff = config.initial_backoff;
  for (std::size_t attempt = 0;; ++attempt) {
    Attempt a = send_once(ep, config, full_path, payload, api_key);
    if (a.kind == Attempt::Kind::Ok) return std::move(a.body);
    const std::string where = config.base_url + std::string(path);
    if (a.kind == Attempt::Kind::Fail || attempt >= config.max_retries) {
      throw Error(a.code, where + ": " + a.detail + " (after " + std::to_string(attempt + 1) +
                              " attempt" + (attempt ? "s" : "") + ")");
    }
    std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

}  // namespace vexa::http
