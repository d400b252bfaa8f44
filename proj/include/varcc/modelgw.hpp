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
#include <cstdlib>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "varcc/prompts.hpp"
#include "varcc/util.hpp"
#include "varcc/varmodel.hpp"

namespace varcc::modelgw {

struct ModelConfig {
  std::string endpoint;  // e.g. http://127.0.0.1:11434
  std::string model;
  std::string provider = "openai-chat";
  double temperature = 0.4;
  int max_retries = 3;
  double backoff_base_seconds = 1.0;
  double request_timeout_seconds = 300.0;
  std::string api_key_env;            // name of the env var holding the key
  std::optional<int> max_tokens;      // provider default when unset
  double requests_per_second = 0.0;   // 0 = unlimited

  // Open-weight model served locally.
  static ModelConfig local_defaults() {
    ModelConfig c;
    c.temperature = 0.4;
    return c;
  }

  // Hosted proprietary endpoint.
  static ModelConfig remote_defaults() {
    ModelConfig c;
    c.temperature = 0.2;
    c.max_retries = 3;
    c.backoff_base_seconds = 1.0;
    return c;
  }
};

enum class ResponseStatus { Ok, Malformed, Truncated, Transport };

inline const char* to_string(ResponseStatus s) {
  switch (s) {
    case ResponseStatus::Ok: return "ok";
    case ResponseStatus::Malformed: return "malformed";
    case ResponseStatus::Truncated: return "truncated";
    case ResponseStatus::Transport: return "transport";
  }
  return "transport";
}

struct ModelResponse {
  ResponseStatus status = ResponseStatus::Truncated;
  std::vector<varmodel::Product> result;
  int dropped_result_entries = 0;  // unparseable entries inside "result"
  std::string result_text;         // raw "result" value as received
  std::string explanation;
  std::string fixed_code;       // FullCode kind
  std::string fix_description;  // Diff kind
  std::string raw;

  bool wellformed() const { return status == ResponseStatus::Ok; }
  bool predicted_positive() const { return !result.empty(); }
};

namespace detail {

// First balanced {...} object, honoring string literals and escapes.
// Returns npos-pair when no object closes.
inline std::pair<size_t, size_t> find_balanced_object(std::string_view text) {
  size_t start = text.find('{');
  if (start == std::string_view::npos) return {std::string_view::npos, std::string_view::npos};
  int depth = 0;
  bool in_string = false;
  for (size_t i = start; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
    } else if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return {start, i + 1};
    }
  }
  return {std::string_view::npos, std::string_view::npos};
}

inline std::string strip_code_fences(std::string_view text) {
  std::string_view t = trim_view(text);
  if (starts_with(t, "```")) {
    size_t nl = t.find('\n');
    t = nl == std::string_view::npos ? std::string_view{} : t.substr(nl + 1);
    t = trim_view(t);
    if (ends_with(t, "```")) t = trim_view(t.substr(0, t.size() - 3));
  }
  return std::string(t);
}

inline std::string json_unescape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 >= s.size()) {
      out += s[i];
      continue;
    }
    char e = s[++i];
    switch (e) {
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      case 'r': out += '\r'; break;
      case '"': out += '"'; break;
      case '\\': out += '\\'; break;
      case '/': out += '/'; break;
      default:
        out += '\\';
        out += e;
    }
  }
  return out;
}

// Last-ditch field recovery for payloads that never parse as JSON: finds
// "key": "value" and returns the unescaped value.
inline std::optional<std::string> scrape_string_field(std::string_view text,
                                                      std::string_view key) {
  std::string needle = "\"" + std::string(key) + "\"";
  size_t pos = text.find(needle);
  if (pos == std::string_view::npos) return std::nullopt;
  pos += needle.size();
  while (pos < text.size() && (is_space(text[pos]) || text[pos] == ':')) ++pos;
  if (pos >= text.size() || text[pos] != '"') return std::nullopt;
  ++pos;
  std::string value;
  for (size_t i = pos; i < text.size(); ++i) {
    if (text[i] == '\\' && i + 1 < text.size()) {
      value += text[i];
      value += text[++i];
    } else if (text[i] == '"') {
      return json_unescape(value);
    } else {
      value += text[i];
    }
  }
  return std::nullopt;  // value itself was cut off
}

inline void parse_result_entries(std::string_view text, ModelResponse& out) {
  out.result_text = std::string(text);
  for (const auto& piece : split(text, ';')) {
    std::string entry = trim(piece);
    if (entry.empty()) continue;
    try {
      varmodel::Product p = varmodel::parse_product(entry);
      if (p.assignment.empty()) continue;
      out.result.push_back(std::move(p));
    } catch (const varmodel::BadProductSyntax&) {
      ++out.dropped_result_entries;
    }
  }
}

}  // namespace detail

// Parses a (possibly malformed) model payload. Never throws: truncation and
// structural problems are recorded in the status, with best-effort field
// recovery so result-emptiness scoring still works on damaged payloads.
inline ModelResponse parse_response(std::string_view raw, PromptKind kind) {
  ModelResponse out;
  out.raw = std::string(raw);
  std::string_view fix_key = kind == PromptKind::FullCode ? "fixed_code" : "fix";

  std::string stripped = detail::strip_code_fences(raw);
  auto [begin, end] = detail::find_balanced_object(stripped);
  if (begin == std::string_view::npos) {
    out.status = ResponseStatus::Truncated;
    if (auto v = detail::scrape_string_field(stripped, "result"))
      detail::parse_result_entries(*v, out);
    if (auto v = detail::scrape_string_field(stripped, "explanation")) out.explanation = *v;
    if (auto v = detail::scrape_string_field(stripped, fix_key)) {
      (kind == PromptKind::FullCode ? out.fixed_code : out.fix_description) = *v;
    }
    return out;
  }

  std::string object_text = stripped.substr(begin, end - begin);
  nlohmann::json doc = nlohmann::json::parse(object_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    out.status = ResponseStatus::Malformed;
    if (auto v = detail::scrape_string_field(stripped, "result"))
      detail::parse_result_entries(*v, out);
    if (auto v = detail::scrape_string_field(stripped, "explanation")) out.explanation = *v;
    if (auto v = detail::scrape_string_field(stripped, fix_key)) {
      (kind == PromptKind::FullCode ? out.fixed_code : out.fix_description) = *v;
    }
    return out;
  }

  auto string_of = [&](const char* key) -> std::string {
    if (!doc.contains(key)) return "";
    const auto& v = doc[key];
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array()) {
      // Some models emit the product list as an array; join it back.
      std::string joined;
      for (const auto& e : v) {
        if (!e.is_string()) continue;
        if (!joined.empty()) joined += ';';
        joined += e.get<std::string>();
      }
      return joined;
    }
    return v.dump();
  };

  detail::parse_result_entries(string_of("result"), out);
  out.explanation = string_of("explanation");
  if (kind == PromptKind::FullCode)
    out.fixed_code = string_of("fixed_code");
  else
    out.fix_description = string_of(std::string(fix_key).c_str());

  bool exact_keys = doc.size() == 3 && doc.contains("result") && doc.contains("explanation") &&
                    doc.contains(std::string(fix_key));
  bool string_values = exact_keys && doc["result"].is_string() &&
                       doc["explanation"].is_string() && doc[std::string(fix_key)].is_string();
  bool nothing_else = trim(raw) == trim_view(object_text);
  out.status = exact_keys && string_values && nothing_else ? ResponseStatus::Ok
                                                           : ResponseStatus::Malformed;
  return out;
}

struct RunRecord {
  std::string system_id;
  int attempt = 1;  // 1-based within a run batch
  ResponseStatus status = ResponseStatus::Transport;
  std::optional<ModelResponse> response;
  double latency_seconds = 0.0;
  int attempts_used = 0;  // transport-level tries, <= 1 + max_retries
  std::string transport_error;
  std::string request_body;   // logged verbatim; the API key travels in a header only
  std::string response_body;
};

}  // namespace varcc::modelgw
