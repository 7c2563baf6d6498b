#pragma once

#include <atomic>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "omnibench/clock.hpp"
#include "omnibench/http.hpp"

namespace omnibench::provider {

struct GenerationRequest {
  std::string system_prompt;
  std::string user_prompt;
  int max_tokens = 256;
  double temperature = 0.0;
  std::string model_id;
};

struct GenerationResponse {
  std::string text;
  int prompt_tokens = 0;
  int completion_tokens = 0;
  std::optional<double> provider_latency_hint;

  bool empty_output() const { return text.empty(); }
};

class Provider {
 public:
  virtual ~Provider() = default;
  virtual GenerationResponse generate(const GenerationRequest& req) = 0;
  /// Short identity recorded in run metadata, e.g. "mock" or "remote:<model>".
  virtual std::string id() const = 0;
};

/// Scripted provider: the response of the longest script key that occurs in
/// the prompt (ties broken lexicographically), else the default.
///
/// Script JSON: {"<substring>": "<response>" | {"response": "...",
/// "delay_ms": n} | {"error": "..."}, "_default": "...", "_delay_ms": n}.
/// An "error" entry fails the call with a non-retryable ProviderError. Delays
/// are spent on the injected clock, so a ManualClock makes them virtual.
class MockProvider final : public Provider {
 public:
  struct Entry {
    std::string response;
    std::optional<double> delay_s;
    std::optional<std::string> error;
  };

  MockProvider(std::map<std::string, Entry> script, std::string default_response,
               double default_delay_s = 0.0, std::shared_ptr<Clock> clock = nullptr);

  static std::unique_ptr<MockProvider> from_json(std::string_view json_text,
                                                 std::shared_ptr<Clock> clock = nullptr);
  static std::unique_ptr<MockProvider> from_file(const std::string& path,
                                                 std::shared_ptr<Clock> clock = nullptr);

  GenerationResponse generate(const GenerationRequest& req) override;
  std::string id() const override { return "mock"; }

  std::size_t call_count() const noexcept { return calls_.load(); }

 private:
  std::map<std::string, Entry> script_;
  std::string default_response_;
  double default_delay_s_;
  std::shared_ptr<Clock> clock_;
  std::atomic<std::size_t> calls_{0};
};

/// Client for POST /v1/chat/completions.
class RemoteProvider final : public Provider {
 public:
  RemoteProvider(http::Endpoint endpoint, std::string model, http::RetryPolicy retry = {},
                 http::Sleeper sleep = http::real_sleep);

  GenerationResponse generate(const GenerationRequest& req) override;
  std::string id() const override { return "remote:" + model_; }

 private:
  http::Endpoint endpoint_;
  std::string model_;
  http::RetryPolicy retry_;
  http::Sleeper sleep_;
};

}  // namespace omnibench::provider
