// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "sforge/http.hpp"

#include <fmt/format.h>

#include <cmath>
#include <cstdlib>
#include <thread>

#include "sforge/error.hpp"

namespace sforge {

Endpoint Endpoint::from_env(std::string_view prefix) {
  auto get = [&](std::string_view suffix) -> std::string {
    const std::string name = fmt::format("{}_{}", prefix, suffix);
    const char* v = std::getenv(name.c_str());
    return v ? std::string(v) : std::string();
  };
  Endpoint e{get("URL"), get("KEY"), get("MODEL")};
  if (e.base_url.empty()) {
    throw ConfigError(fmt::format("environment variable {}_URL is not set", prefix));
  }
  return e;
}

void with_retries(const RetryPolicy& policy, const std::function<void()>& fn) {
  const int attempts = std::max(1, policy.attempts);
  for (int k = 0;; ++k) {
    try {
      fn();
      return;
    } catch (const ProviderError&) {
      if (k + 1 >= attempts) throw;
    }
    const double factor = std::pow(policy.multiplier, k);
    std::this_thread::sleep_for(std::chrono::duration_cast<std::chrono::milliseconds>(
        policy.base_delay * factor));
  }
}

JsonHttpClient::JsonHttpClient(Endpoint endpoint, std::chrono::seconds timeout)
    : endpoint_(std::move(endpoint)), timeout_(timeout) {
  const std::string& url = endpoint_.base_url;
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError(fmt::format("endpoint URL '{}' has no scheme", url));
  }
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError(fmt::format("endpoint URL '{}': unsupported scheme", url));
  }
  const std::size_t path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

nlohmann::json JsonHttpClient::post(std::string_view path, const nlohmann::json& body) const {
  httplib::Client cli(scheme_host_port_);
  cli.set_connection_timeout(timeout_);
  cli.set_read_timeout(timeout_);
  cli.set_write_timeout(timeout_);
  httplib::Headers headers;
  if (!endpoint_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + endpoint_.api_key);
  }
  const std::string full = path_prefix_ + std::string(path);
  auto res = cli.Post(full, headers, body.dump(), "application/json");
  if (!res) {
    throw ProviderError(fmt::format("POST {}{}: {}", scheme_host_port_, full,
                                    httplib::to_string(res.error())));
  }
  if (res->status < 200 || res->status >= 300) {
    throw ProviderError(fmt::format("POST {}{}: HTTP {}", scheme_host_port_, full, res->status));
  }
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ProviderError(fmt::format("POST {}{}: response is not JSON: {}", scheme_host_port_,
                                    full, e.what()));
  }
}

}  // namespace sforge
