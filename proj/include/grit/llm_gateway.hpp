// Copyright 2026 The Grit Forge Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GRIT_LLM_GATEWAY_HPP_
#define GRIT_LLM_GATEWAY_HPP_

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace grit {

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;  // nonempty
  double temperature = 0.0;           // [0, 2]
  int max_tokens = 512;
};

// Throws Error{kInvalidArgument} when the request breaks its invariants.
void validate_request(const ChatRequest& req);

// Wire body: {model, messages:[{role, content}], temperature, max_tokens}.
nlohmann::json request_to_json(const ChatRequest& req);
ChatRequest request_from_json(const nlohmann::json& j);

// Hex SHA-256 of the request's JSON with sorted keys, so field order in the
// source does not matter.
std::string canonical_key(const ChatRequest& req);

struct HttpResponse {
  int status = 0;
  std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

// Throws Error{kTransportError} when no response could be obtained.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const std::string& url, const HttpHeaders& headers,
                            const std::string& body) = 0;
};

// cpp-httplib client; http:// and https:// URLs.
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(std::chrono::seconds timeout = std::chrono::seconds(120))
      : timeout_(timeout) {}
  HttpResponse post(const std::string& url, const HttpHeaders& headers,
                    const std::string& body) override;

 private:
  std::chrono::seconds timeout_;
};

// Refuses every call and counts the attempts.
class DenyAllTransport : public Transport {
 public:
  HttpResponse post(const std::string& url, const HttpHeaders& headers,
                    const std::string& body) override;
  std::size_t attempts() const { return attempts_.load(); }

 private:
  std::atomic<std::size_t> attempts_{0};
};

// One JSON file per key; writes go through a temporary file and rename.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, const ChatRequest& req,
           const std::string& response) const;
  std::filesystem::path path_for(const std::string& key) const;

 private:
  std::filesystem::path dir_;
};

struct GatewayConfig {
  std::string endpoint;
  std::string api_key;
  std::string model;
  bool offline = false;
  std::filesystem::path cache_dir = ".grit-cache";
  int max_attempts = 5;
  std::chrono::milliseconds backoff_base{1000};
  double backoff_factor = 2.0;
  double requests_per_minute = 60.0;
  int max_in_flight = 4;

  // GRIT_LLM_ENDPOINT, GRIT_LLM_API_KEY, GRIT_LLM_MODEL.
  static GatewayConfig from_env();
};

// Injected time source so retry and rate-limit schedules are testable.
struct Timing {
  std::function<std::chrono::steady_clock::time_point()> now;
  std::function<void(std::chrono::milliseconds)> sleep;

  static Timing real();
};

// Delay before retry attempt k + 1, k in [1, max_attempts - 1].
std::chrono::milliseconds backoff_delay(const GatewayConfig& config, int k);

// Chat-completion client with a file cache, single-flight deduplication of
// identical in-flight requests, bounded concurrency, a requests-per-minute
// limiter and exponential backoff. Offline mode never touches the transport.
class LlmGateway {
 public:
  LlmGateway(GatewayConfig config, std::shared_ptr<Transport> transport,
             Timing timing = Timing::real());

  // Errors: kOfflineMiss, kBackendUnavailable, kAuthError, kRateLimited,
  // kTransportError, kInvalidArgument.
  std::string chat(const ChatRequest& req);

  const GatewayConfig& config() const { return config_; }
  // Logical requests that went to the network (one per uncached key).
  std::size_t network_requests() const { return network_requests_.load(); }
  std::size_t http_attempts() const { return http_attempts_.load(); }
  std::size_t cache_hits() const { return cache_hits_.load(); }

 private:
  std::string fetch(const ChatRequest& req);
  void wait_for_rate_slot();

  GatewayConfig config_;
  std::shared_ptr<Transport> transport_;
  Timing timing_;
  ResponseCache cache_;
  std::counting_semaphore<64> in_flight_;

  std::mutex mu_;
  std::map<std::string, std::shared_future<std::string>> pending_;
  std::chrono::steady_clock::time_point next_slot_{};

  std::atomic<std::size_t> network_requests_{0};
  std::atomic<std::size_t> http_attempts_{0};
  std::atomic<std::size_t> cache_hits_{0};
};

// Extracts choices[0].message.content from a chat-completions response.
std::string extract_completion_text(const std::string& body);

}  // namespace grit

#endif  // GRIT_LLM_GATEWAY_HPP_
