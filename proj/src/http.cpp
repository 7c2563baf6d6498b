#include "omnibench/http.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include <httplib.h>

#include "omnibench/error.hpp"

namespace omnibench::http {
namespace {

struct SplitUrl {
  std::string scheme_host_port;
  std::string path_prefix;
};

SplitUrl split_base_url(const std::string& base_url) {
  if (base_url.empty()) {
    fail(ErrorKind::Config, "no API base URL configured (set OMNIBENCH_API_BASE or api_base)");
  }
  const auto scheme_end = base_url.find("://");
  const std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto slash = base_url.find('/', host_start);
  SplitUrl out;
  out.scheme_host_port = base_url.substr(0, slash);
  if (slash != std::string::npos) out.path_prefix = base_url.substr(slash);
  while (!out.path_prefix.empty() && out.path_prefix.back() == '/') out.path_prefix.pop_back();
  if (out.path_prefix.size() >= 3 &&
      out.path_prefix.compare(out.path_prefix.size() - 3, 3, "/v1") == 0) {
    out.path_prefix.resize(out.path_prefix.size() - 3);
  }
  return out;
}

std::string describe_status(int status, const std::string& body) {
  std::string msg = "HTTP " + std::to_string(status);
  if (status == 401 || status == 403) {
    msg += ": authentication rejected; check OMNIBENCH_API_KEY";
  }
  if (!body.empty()) msg += ": " + body.substr(0, 300);
  return msg;
}

}  // namespace

StatusClass classify(int http_status) noexcept {
  if (http_status >= 200 && http_status < 300) return StatusClass::Ok;
  if (http_status == 0 || http_status == 408 || http_status == 429 || http_status >= 500) {
    return StatusClass::Retryable;
  }
  return StatusClass::Fatal;
}

double RetryPolicy::backoff(int retry) const noexcept {
  const double delay = base_delay_s * std::pow(2.0, std::max(0, retry - 1));
  return std::min(delay, max_delay_s);
}

void real_sleep(double seconds) {
  if (seconds > 0) std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

nlohmann::json with_retry(const std::function<nlohmann::json()>& attempt,
                          const RetryPolicy& policy, const Sleeper& sleep) {
  const int budget = std::max(1, policy.max_attempts);
  for (int i = 1;; ++i) {
    try {
      return attempt();
    } catch (const ProviderError& e) {
      if (!e.retryable() || i >= budget) throw;
      sleep(policy.backoff(i));
    }
  }
}

nlohmann::json post_json(const Endpoint& endpoint, const std::string& path,
                         const nlohmann::json& body, const RetryPolicy& policy,
                         const Sleeper& sleep) {
  const SplitUrl url = split_base_url(endpoint.base_url);
  const std::string full_path = url.path_prefix + path;
  const std::string payload = body.dump();

  return with_retry(
      [&]() -> nlohmann::json {
        httplib::Client client(url.scheme_host_port);
        if (!client.is_valid()) {
          throw ProviderError("invalid API base URL '" + endpoint.base_url + "'", false);
        }
        const auto secs = std::chrono::duration<double>(endpoint.timeout_s);
        client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(secs));
        client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(secs));
        client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(secs));
        httplib::Headers headers;
        if (!endpoint.api_key.empty()) {
          headers.emplace("Authorization", "Bearer " + endpoint.api_key);
        }
        auto res = client.Post(full_path, headers, payload, "application/json");
        if (!res) {
          throw ProviderError("POST " + full_path + " failed: " + httplib::to_string(res.error()),
                              true, 0);
        }
        switch (classify(res->status)) {
          case StatusClass::Ok:
            break;
          case StatusClass::Retryable:
            throw ProviderError(describe_status(res->status, res->body), true, res->status);
          case StatusClass::Fatal:
            throw ProviderError(describe_status(res->status, res->body), false, res->status);
        }
        try {
          return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception&) {
          fail(ErrorKind::Protocol, "POST " + full_path + ": response is not JSON");
        }
      },
      policy, sleep);
}

}  // namespace omnibench::http
