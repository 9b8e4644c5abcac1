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

#include "grit/llm_gateway.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include "grit/error.hpp"
#include "grit/rng.hpp"

namespace grit {
namespace {

using nlohmann::json;

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kIo, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int clamp_in_flight(int n) { return std::clamp(n, 1, 64); }

}  // namespace

void validate_request(const ChatRequest& req) {
  if (req.messages.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "chat request has no messages");
  }
  if (!(req.temperature >= 0.0 && req.temperature <= 2.0)) {
    throw Error(ErrorCode::kInvalidArgument, "temperature must lie in [0, 2]");
  }
  if (req.max_tokens <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_tokens must be positive");
  }
}

json request_to_json(const ChatRequest& req) {
  json messages = json::array();
  for (const auto& m : req.messages) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  return {{"model", req.model},
          {"messages", messages},
          {"temperature", req.temperature},
          {"max_tokens", req.max_tokens}};
}

ChatRequest request_from_json(const json& j) {
  ChatRequest req;
  try {
    req.model = j.at("model").get<std::string>();
    for (const json& m : j.at("messages")) {
      req.messages.push_back(
          {m.at("role").get<std::string>(), m.at("content").get<std::string>()});
    }
    req.temperature = j.at("temperature").get<double>();
    req.max_tokens = j.at("max_tokens").get<int>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("malformed chat request: ") + e.what());
  }
  return req;
}

std::string canonical_key(const ChatRequest& req) {
  validate_request(req);
  // nlohmann::json objects keep keys sorted, so dump() is canonical.
  return sha256_hex(request_to_json(req).dump());
}

HttpResponse DenyAllTransport::post(const std::string& url, const HttpHeaders&,
                                    const std::string&) {
  ++attempts_;
  throw Error(ErrorCode::kTransportError, "network access denied: " + url);
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
  return dir_ / (key + ".json");
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
  std::ifstream in(path_for(key));
  if (!in) return std::nullopt;
  try {
    json j = json::parse(in);
    return j.at("response").get<std::string>();
  } catch (const json::exception&) {
    // A torn or hand-edited entry is treated as a miss.
    return std::nullopt;
  }
}

void ResponseCache::put(const std::string& key, const ChatRequest& req,
                        const std::string& response) const {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create cache dir " + dir_.string());
  const json entry = {{"key", key},
                      {"request", request_to_json(req)},
                      {"response", response},
                      {"created_at", utc_timestamp()}};
  std::ostringstream tid;
  tid << std::this_thread::get_id();
  const auto final_path = path_for(key);
  auto tmp = final_path;
  tmp += ".tmp." + tid.str();
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << entry.dump(2) << '\n';
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, final_path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot publish cache entry " + final_path.string());
}

GatewayConfig GatewayConfig::from_env() {
  GatewayConfig c;
  if (const char* v = std::getenv("GRIT_LLM_ENDPOINT")) c.endpoint = v;
  if (const char* v = std::getenv("GRIT_LLM_API_KEY")) c.api_key = v;
  if (const char* v = std::getenv("GRIT_LLM_MODEL")) c.model = v;
  return c;
}

Timing Timing::real() {
  return Timing{[] { return std::chrono::steady_clock::now(); },
                [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }};
}

std::chrono::milliseconds backoff_delay(const GatewayConfig& config, int k) {
  const double ms = static_cast<double>(config.backoff_base.count()) *
                    std::pow(config.backoff_factor, k - 1);
  return std::chrono::milliseconds(static_cast<long long>(std::ceil(ms)));
}

std::string extract_completion_text(const std::string& body) {
  try {
    const json j = json::parse(body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kTransportError,
                std::string("unexpected chat-completions response: ") + e.what());
  }
}

LlmGateway::LlmGateway(GatewayConfig config, std::shared_ptr<Transport> transport,
                       Timing timing)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      timing_(std::move(timing)),
      cache_(config_.cache_dir),
      in_flight_(clamp_in_flight(config_.max_in_flight)) {}

std::string LlmGateway::chat(const ChatRequest& req) {
  const std::string key = canonical_key(req);
  if (auto hit = cache_.get(key)) {
    ++cache_hits_;
    return *hit;
  }
  if (config_.offline) {
    throw Error(ErrorCode::kOfflineMiss,
                "offline mode and no cached response for key " + key);
  }

  std::promise<std::string> promise;
  std::shared_future<std::string> future;
  bool owner = false;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = pending_.find(key);
    if (it != pending_.end()) {
      future = it->second;
    } else {
      future = promise.get_future().share();
      pending_.emplace(key, future);
      owner = true;
    }
  }
  if (!owner) return future.get();

  try {
    // Another thread may have finished this key between the cache probe and
    // taking ownership.
    std::optional<std::string> text = cache_.get(key);
    if (text) {
      ++cache_hits_;
    } else {
      text = fetch(req);
      cache_.put(key, req, *text);
    }
    promise.set_value(*text);
    std::lock_guard<std::mutex> lock(mu_);
    pending_.erase(key);
    return *text;
  } catch (...) {
    promise.set_exception(std::current_exception());
    std::lock_guard<std::mutex> lock(mu_);
    pending_.erase(key);
    throw;
  }
}

void LlmGateway::wait_for_rate_slot() {
  if (config_.requests_per_minute <= 0.0) return;
  const auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(60.0 / config_.requests_per_minute));
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard<std::mutex> lock(mu_);
    const auto now = timing_.now();
    slot = std::max(now, next_slot_);
    next_slot_ = slot + interval;
  }
  const auto now = timing_.now();
  if (slot > now) {
    timing_.sleep(std::chrono::ceil<std::chrono::milliseconds>(slot - now));
  }
}

std::string LlmGateway::fetch(const ChatRequest& req) {
  if (config_.endpoint.empty()) {
    throw Error(ErrorCode::kBackendUnavailable,
                "no chat endpoint configured (set GRIT_LLM_ENDPOINT)");
  }
  if (config_.api_key.empty()) {
    throw Error(ErrorCode::kBackendUnavailable,
                "no credential configured (set GRIT_LLM_API_KEY)");
  }
  ++network_requests_;
  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<64>& s;
    ~Release() { s.release(); }
  } release{in_flight_};

  const std::string body = request_to_json(req).dump();
  const HttpHeaders headers = {{"Authorization", "Bearer " + config_.api_key},
                               {"Content-Type", "application/json"}};
  const int attempts = std::max(config_.max_attempts, 1);
  std::optional<Error> last;
  for (int k = 1; k <= attempts; ++k) {
    if (k > 1) timing_.sleep(backoff_delay(config_, k - 1));
    wait_for_rate_slot();
    ++http_attempts_;
    HttpResponse resp;
    try {
      resp = transport_->post(config_.endpoint, headers, body);
    } catch (const Error& e) {
      last = Error(ErrorCode::kTransportError, e.what());
      continue;
    }
    if (resp.status == 200) {
      try {
        return extract_completion_text(resp.body);
      } catch (const Error& e) {
        last = e;
        continue;
      }
    }
    const std::string detail =
        "HTTP " + std::to_string(resp.status) + " from " + config_.endpoint;
    if (resp.status == 401 || resp.status == 403) {
      throw Error(ErrorCode::kAuthError, detail);
    }
    if (resp.status == 429) {
      last = Error(ErrorCode::kRateLimited, detail);
      continue;
    }
    if (resp.status == 408 || resp.status >= 500) {
      last = Error(ErrorCode::kTransportError, detail);
      continue;
    }
    throw Error(ErrorCode::kTransportError, detail + " (not retried)");
  }
  throw Error(last->code(), std::string(last->what()) + " after " +
                                std::to_string(attempts) + " attempts");
}

}  // namespace grit
