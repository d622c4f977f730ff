// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <functional>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>

namespace sforge {

/// Base URL plus credential for a service speaking the usual
/// /chat/completions and /embeddings JSON conventions.
struct Endpoint {
  /// e.g. "http://127.0.0.1:8000/v1"; the path prefix is kept.
  std::string base_url;
  std::string api_key;
  std::string model;

  /// Reads <prefix>_URL, <prefix>_KEY and <prefix>_MODEL. Throws ConfigError
  /// when <prefix>_URL is unset.
  static Endpoint from_env(std::string_view prefix);
};

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds base_delay{500};
  double multiplier = 2.0;
};

/// Runs `fn` up to policy.attempts times, sleeping base_delay * multiplier^k
/// between attempts. Only ProviderError is retried; the last one is rethrown.
void with_retries(const RetryPolicy& policy, const std::function<void()>& fn);

class JsonHttpClient {
 public:
  explicit JsonHttpClient(Endpoint endpoint,
                          std::chrono::seconds timeout = std::chrono::seconds(120));

  /// POSTs `body` to base_url + path. Throws ProviderError on transport
  /// failure, non-2xx status, or a non-JSON response.
  nlohmann::json post(std::string_view path, const nlohmann::json& body) const;

  const Endpoint& endpoint() const { return endpoint_; }

 private:
  Endpoint endpoint_;
  std::string scheme_host_port_;
  std::string path_prefix_;
  std::chrono::seconds timeout_;
};

}  // namespace sforge
