#pragma once

#include <memory>
#include <optional>
#include <string>

#include "trex/gateway.hpp"

namespace trex {

// Chat-completions style HTTP+JSON endpoint.
struct HttpProviderConfig {
  std::string base_url;  // scheme://host[:port], plain http
  std::string path = "/v1/chat/completions";
  std::string api_key;   // sent as a bearer token when non-empty
  std::string model = "gpt-3.5-turbo";
  std::optional<double> temperature;
  int max_retries = 3;    // additional attempts after the first
  int backoff_ms = 250;   // doubles per retry
  int timeout_s = 120;

  void validate() const;
};

std::shared_ptr<Provider> live_http_provider(HttpProviderConfig config);

}  // namespace trex
