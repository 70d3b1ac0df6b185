#include "trex/http_provider.hpp"

#include <chrono>
#include <thread>

#include "httplib.h"
#include "trex/errors.hpp"

namespace trex {

void HttpProviderConfig::validate() const {
  if (base_url.empty()) throw ConfigError("live provider needs a base URL");
  if (base_url.rfind("https://", 0) == 0) {
    throw ConfigError("TLS is not compiled in; point the provider at a plain-http endpoint or a local proxy");
  }
  if (base_url.rfind("http://", 0) != 0) {
    throw ConfigError("base URL must start with http://");
  }
  if (model.empty()) throw ConfigError("live provider needs a model id");
  if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (backoff_ms < 1) throw ConfigError("backoff_ms must be >= 1");
}

namespace {

class LiveHttpProvider : public Provider {
 public:
  explicit LiveHttpProvider(HttpProviderConfig config) : config_(std::move(config)) {
    config_.validate();
  }

  std::string id() const override { return "http:" + config_.base_url; }
  std::string model() const override { return config_.model; }

  std::string complete(const ChatTranscript& session, const ChatMessage& message,
                       const QueryIntent&) override {
    nlohmann::json payload;
    payload["model"] = config_.model;
    auto messages = nlohmann::json::array();
    for (const auto& m : session.messages) {
      messages.push_back({{"role", m.role}, {"content", m.content}});
    }
    messages.push_back({{"role", message.role}, {"content", message.content}});
    payload["messages"] = messages;
    if (config_.temperature) payload["temperature"] = *config_.temperature;
    const std::string body = payload.dump();

    std::string last_failure;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
      if (attempt > 0) {
        auto wait = std::chrono::milliseconds(config_.backoff_ms << (attempt - 1));
        std::this_thread::sleep_for(wait);
      }
      httplib::Client client(config_.base_url);
      client.set_connection_timeout(config_.timeout_s);
      client.set_read_timeout(config_.timeout_s);
      httplib::Headers headers;
      if (!config_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config_.api_key);
      }
      auto res = client.Post(config_.path, headers, body, "application/json");
      if (!res) {
        last_failure = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 429 || res->status >= 500) {
        last_failure = "status " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200) {
        throw GatewayError("provider rejected the request with status " + std::to_string(res->status) +
                           ": " + res->body.substr(0, 200));
      }
      try {
        auto parsed = nlohmann::json::parse(res->body);
        return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        throw GatewayError(std::string("malformed provider response: ") + e.what());
      }
    }
    throw GatewayError("provider unreachable after " + std::to_string(config_.max_retries + 1) +
                       " attempts (" + last_failure + ")");
  }

 private:
  HttpProviderConfig config_;
};

}  // namespace

std::shared_ptr<Provider> live_http_provider(HttpProviderConfig config) {
  return std::make_shared<LiveHttpProvider>(std::move(config));
}

}  // namespace trex
