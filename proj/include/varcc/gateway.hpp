// Copyright 2026 The varcc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "varcc/modelgw.hpp"

namespace varcc::modelgw {

// Wire-shape adapter. Every provider speaks some chat-completion dialect;
// evaluation code only ever sees the extracted text.
struct ProviderAdapter {
  std::string path;
  std::string (*make_body)(const ModelConfig&, const std::string& prompt);
  std::string (*extract_text)(const nlohmann::json& envelope);
};

namespace detail {

inline std::string openai_body(const ModelConfig& config, const std::string& prompt) {
  nlohmann::ordered_json body;
  body["model"] = config.model;
  body["temperature"] = config.temperature;
  if (config.max_tokens) body["max_tokens"] = *config.max_tokens;
  body["messages"] = nlohmann::json::array({nlohmann::json{{"role", "user"}, {"content", prompt}}});
  return body.dump();
}

inline std::string openai_extract(const nlohmann::json& envelope) {
  return envelope.at("choices").at(0).at("message").at("content").get<std::string>();
}

}  // namespace detail

inline ProviderAdapter provider_adapter(const std::string& provider) {
  if (provider == "openai-chat")
    return ProviderAdapter{"/v1/chat/completions", &detail::openai_body, &detail::openai_extract};
  throw std::invalid_argument("unknown provider: " + provider);
}

// Per-endpoint request pacing shared by the in-flight workers.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_second) : interval_(0) {
    if (requests_per_second > 0)
      interval_ = std::chrono::duration<double>(1.0 / requests_per_second);
  }

  void wait() {
    if (interval_.count() == 0) return;
    std::unique_lock<std::mutex> lock(mutex_);
    auto now = std::chrono::steady_clock::now();
    if (now < next_) {
      auto until = next_;
      next_ = until + std::chrono::duration_cast<std::chrono::steady_clock::duration>(interval_);
      lock.unlock();
      std::this_thread::sleep_until(until);
    } else {
      next_ = now + std::chrono::duration_cast<std::chrono::steady_clock::duration>(interval_);
    }
  }

 private:
  std::mutex mutex_;
  std::chrono::duration<double> interval_;
  std::chrono::steady_clock::time_point next_ = std::chrono::steady_clock::now();
};

// One chat-completion request, one conversation, no context reuse. Transport
// failures are retried up to max_retries with exponential backoff
// (base * 2^attempt seconds); every outcome is encoded in the record, never
// thrown.
inline RunRecord request(const ModelConfig& config, const std::string& prompt,
                         const std::string& system_id = "", int attempt = 1,
                         PromptKind kind = PromptKind::FullCode,
                         RateLimiter* limiter = nullptr) {
  RunRecord record;
  record.system_id = system_id;
  record.attempt = attempt;

  ProviderAdapter adapter = provider_adapter(config.provider);
  record.request_body = adapter.make_body(config, prompt);

  std::string api_key;
  if (!config.api_key_env.empty()) {
    if (const char* v = std::getenv(config.api_key_env.c_str())) api_key = v;
  }

  auto start = std::chrono::steady_clock::now();
  for (int try_index = 0; try_index <= config.max_retries; ++try_index) {
    if (try_index > 0) {
      double delay = config.backoff_base_seconds * std::pow(2.0, try_index - 1);
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }
    if (limiter) limiter->wait();
    ++record.attempts_used;

    httplib::Client client(config.endpoint);
    client.set_connection_timeout(std::chrono::duration<double>(config.request_timeout_seconds));
    client.set_read_timeout(std::chrono::duration<double>(config.request_timeout_seconds));
    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

    auto res = client.Post(adapter.path, headers, record.request_body, "application/json");
    if (!res) {
      record.transport_error = "connection failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      record.transport_error = "http status " + std::to_string(res->status);
      continue;
    }
    record.response_body = res->body;
    nlohmann::json envelope = nlohmann::json::parse(res->body, nullptr, false);
    std::string content;
    try {
      content = adapter.extract_text(envelope);
    } catch (const std::exception& e) {
      record.transport_error = std::string("bad response envelope: ") + e.what();
      continue;
    }
    record.response = parse_response(content, kind);
    record.status = record.response->status;
    record.transport_error.clear();
    break;
  }
  record.latency_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!record.response) record.status = ResponseStatus::Transport;
  return record;
}

}  // namespace varcc::modelgw
