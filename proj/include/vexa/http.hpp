#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace vexa::http {

struct Endpoint {
  std::string scheme;       // "http" | "https"
  std::string host;
  int port = 80;
  std::string path_prefix;  // no trailing slash, may be empty
};

Endpoint parse_base_url(std::string_view base_url);

struct ClientConfig {
  std::string base_url;
  std::chrono::milliseconds timeout{30000};
  std::size_t max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::string api_key_env_var;  // empty: no Authorization header
};

// Resolves the bearer token; throws AuthError when the variable is named but unset.
std::string resolve_api_key(const ClientConfig& config);

// POSTs a JSON body to base_url + path. Timeouts, connection failures, 429
// and 5xx are retried with exponential backoff (initial_backoff * 2^attempt)
// up to max_retries times. 401/403 fail immediately with AuthError.
nlohmann::json post_json(const ClientConfig& config, std::string_view path,
                         const nlohmann::json& body);

}  // namespace vexa::http
