#pragma once

#include <functional>
#include <string>

#include <json.hpp>

namespace omnibench::http {

struct Endpoint {
  /// Server root, e.g. "http://127.0.0.1:8000". A trailing "/v1" is accepted
  /// and folded into the request path.
  std::string base_url;
  std::string api_key;
  double timeout_s = 120.0;
};

enum class StatusClass { Ok, Retryable, Fatal };

/// 2xx ok; 408, 429 and 5xx retryable; everything else fatal. Status 0
/// stands for a transport failure (refused, reset, timeout) and is retryable.
StatusClass classify(int http_status) noexcept;

struct RetryPolicy {
  int max_attempts = 4;  // initial call plus three retries
  double base_delay_s = 0.5;
  double max_delay_s = 8.0;

  /// Delay before retry number `retry` (1-based): base * 2^(retry-1), capped.
  double backoff(int retry) const noexcept;
};

using Sleeper = std::function<void(double seconds)>;

void real_sleep(double seconds);

/// POSTs `body` to base_url + path and returns the parsed JSON response.
/// Retryable failures are retried per `policy`; the final failure is thrown
/// as ProviderError carrying the HTTP status. A 2xx body that is not JSON is
/// a Protocol error.
nlohmann::json post_json(const Endpoint& endpoint, const std::string& path,
                         const nlohmann::json& body, const RetryPolicy& policy = {},
                         const Sleeper& sleep = real_sleep);

/// Runs `attempt` until it succeeds, throws a non-retryable ProviderError, or
/// the policy's attempt budget is spent.
nlohmann::json with_retry(const std::function<nlohmann::json()>& attempt,
                          const RetryPolicy& policy, const Sleeper& sleep);

}  // namespace omnibench::http
