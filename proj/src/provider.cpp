#include "omnibench/provider.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "omnibench/error.hpp"

namespace omnibench::provider {

MockProvider::MockProvider(std::map<std::string, Entry> script, std::string default_response,
                           double default_delay_s, std::shared_ptr<Clock> clock)
    : script_(std::move(script)),
      default_response_(std::move(default_response)),
      default_delay_s_(default_delay_s),
      clock_(clock ? std::move(clock) : std::make_shared<SteadyClock>()) {
  if (default_delay_s_ < 0) fail(ErrorKind::Config, "mock delay must be nonnegative");
  for (const auto& [key, entry] : script_) {
    if (key.empty()) fail(ErrorKind::Config, "mock script keys must be non-empty");
    if (entry.delay_s && *entry.delay_s < 0) fail(ErrorKind::Config, "mock delay must be nonnegative");
  }
}

std::unique_ptr<MockProvider> MockProvider::from_json(std::string_view json_text, std::shared_ptr<Clock> clock) {
  std::map<std::string, Entry> script;
  std::string fallback;
  double delay_s = 0.0;
  try {
    const auto root = nlohmann::json::parse(json_text);
    if (!root.is_object()) fail(ErrorKind::Config, "mock script must be a JSON object");
    for (const auto& [key, value] : root.items()) {
      if (key == "_default") {
        fallback = value.get<std::string>();
      } else if (key == "_delay_ms") {
        delay_s = value.get<double>() / 1000.0;
      } else if (value.is_string()) {
        script[key] = {value.get<std::string>(), std::nullopt, std::nullopt};
      } else if (value.is_object()) {
        for (const auto& [field, unused] : value.items()) {
          if (field != "response" && field != "delay_ms" && field != "error") {
            fail(ErrorKind::Config, "mock script entry '" + key + "': unknown field '" + field + "'");
          }
        }
        Entry e;
        if (value.contains("error")) {
          e.error = value["error"].get<std::string>();
        } else {
          e.response = value.at("response").get<std::string>();
        }
        if (value.contains("delay_ms")) e.delay_s = value["delay_ms"].get<double>() / 1000.0;
        script[key] = std::move(e);
      } else {
        fail(ErrorKind::Config, "mock script entry '" + key + "' must be a string or an object");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Config, std::string("mock script: ") + e.what());
  }
  return std::make_unique<MockProvider>(std::move(script), std::move(fallback), delay_s, std::move(clock));
}

std::unique_ptr<MockProvider> MockProvider::from_file(const std::string& path, std::shared_ptr<Clock> clock) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Config, "cannot open mock script " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str(), std::move(clock));
}

GenerationResponse MockProvider::generate(const GenerationRequest& req) {
  ++calls_;
  const std::string prompt = req.system_prompt + "\n" + req.user_prompt;
  const Entry* best = nullptr;
  const std::string* best_key = nullptr;
  for (const auto& [key, entry] : script_) {
    if (prompt.find(key) == std::string::npos) continue;
    if (!best_key || key.size() > best_key->size()) {
      best = &entry;
      best_key = &key;
    }
  }
  GenerationResponse res;
  double delay = default_delay_s_;
  if (best) {
    res.text = best->response;
    if (best->delay_s) delay = *best->delay_s;
  } else {
    res.text = default_response_;
  }
  clock_->sleep_for(delay);
  if (best && best->error) throw ProviderError("mock: " + *best->error, false);
  return res;
}

RemoteProvider::RemoteProvider(http::Endpoint endpoint, std::string model, http::RetryPolicy retry,
                               http::Sleeper sleep)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), retry_(retry), sleep_(std::move(sleep)) {
  if (endpoint_.base_url.empty()) {
    fail(ErrorKind::Config, "remote provider needs a base URL (OMNIBENCH_API_BASE)");
  }
  if (model_.empty()) fail(ErrorKind::Config, "remote provider needs a model name");
}

GenerationResponse RemoteProvider::generate(const GenerationRequest& req) {
  if (req.user_prompt.empty()) fail(ErrorKind::Argument, "user prompt must not be empty");
  nlohmann::json messages = nlohmann::json::array();
  if (!req.system_prompt.empty()) messages.push_back({{"role", "system"}, {"content", req.system_prompt}});
  messages.push_back({{"role", "user"}, {"content", req.user_prompt}});
  const nlohmann::json body{{"model", req.model_id.empty() ? model_ : req.model_id},
                            {"messages", messages},
                            {"temperature", req.temperature},
                            {"max_tokens", req.max_tokens}};

  const auto response = http::post_json(endpoint_, "/v1/chat/completions", body, retry_, sleep_);
  GenerationResponse out;
  try {
    const auto& message = response.at("choices").at(0).at("message");
    const auto& content = message.at("content");
    out.text = content.is_null() ? std::string() : content.get<std::string>();
    if (response.contains("usage") && response["usage"].is_object()) {
      out.prompt_tokens = response["usage"].value("prompt_tokens", 0);
      out.completion_tokens = response["usage"].value("completion_tokens", 0);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Protocol, std::string("chat completion response: ") + e.what());
  }
  return out;
}

}  // namespace omnibench::provider
