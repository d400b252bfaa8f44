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

#include <ctime>
#include <fstream>
#include <mutex>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "varcc/evalcore.hpp"
#include "varcc/modelgw.hpp"
#include "varcc/oracle.hpp"
#include "varcc/stability.hpp"

namespace varcc::ledger {

using json = nlohmann::ordered_json;

inline std::string iso8601_now() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// ---- record serialization ----

inline json to_json(const oracle::Diagnostic& d) {
  json j;
  j["severity"] = oracle::to_string(d.severity);
  j["message"] = d.message;
  if (d.line) j["line"] = *d.line;
  j["category"] = oracle::to_string(d.category);
  return j;
}

inline json to_json(const oracle::ProductOutcome& o) {
  json j;
  j["product"] = o.product.canonical();
  j["compiled"] = o.compiled;
  j["duration_seconds"] = o.duration_seconds;
  j["diagnostics"] = json::array();
  for (const auto& d : o.diagnostics) j["diagnostics"].push_back(to_json(d));
  return j;
}

inline json verdict_record(const oracle::SystemVerdict& v) {
  json j;
  j["kind"] = "oracle";
  j["system"] = v.system_id;
  j["features"] = json::array();
  for (const auto& f : v.features) j["features"].push_back(f.name);
  j["has_error"] = v.has_error;
  j["failing"] = json::array();
  for (const auto& p : v.failing) j["failing"].push_back(p.canonical());
  j["outcomes"] = json::array();
  for (const auto& o : v.outcomes) j["outcomes"].push_back(to_json(o));
  return j;
}

// Minimal verdict reconstruction: enough for scoring and reports (full raw
// diagnostics stay in the file, untouched).
inline oracle::SystemVerdict verdict_from_record(const json& j) {
  oracle::SystemVerdict v;
  v.system_id = j.at("system").get<std::string>();
  if (j.contains("features"))
    for (const auto& f : j["features"])
      v.features.push_back(varmodel::FeatureMacro{f.get<std::string>()});
  v.has_error = j.at("has_error").get<bool>();
  if (j.contains("failing"))
    for (const auto& p : j["failing"])
      v.failing.push_back(varmodel::parse_product(p.get<std::string>()));
  if (j.contains("outcomes")) {
    for (const auto& oj : j["outcomes"]) {
      oracle::ProductOutcome o;
      o.product = varmodel::parse_product(oj.at("product").get<std::string>());
      o.compiled = oj.at("compiled").get<bool>();
      if (oj.contains("duration_seconds")) o.duration_seconds = oj["duration_seconds"];
      if (oj.contains("diagnostics")) {
        for (const auto& dj : oj["diagnostics"]) {
          oracle::Diagnostic d;
          std::string sev = dj.at("severity").get<std::string>();
          d.severity = sev == "error"     ? oracle::Severity::Error
                       : sev == "warning" ? oracle::Severity::Warning
                                          : oracle::Severity::Note;
          d.message = dj.at("message").get<std::string>();
          if (dj.contains("line")) d.line = dj["line"].get<int>();
          d.category = oracle::classify_error(d.message);
          o.diagnostics.push_back(std::move(d));
        }
      }
      v.outcomes.push_back(std::move(o));
    }
  }
  return v;
}

// Canonical detection answer key: semicolon-joined canonical failing
// products, empty for "compiles everywhere".
inline std::string detection_answer_key(const modelgw::ModelResponse& r) {
  std::vector<std::string> parts;
  for (const auto& p : r.result) parts.push_back(p.canonical());
  std::sort(parts.begin(), parts.end());
  parts.erase(std::unique(parts.begin(), parts.end()), parts.end());
  return join(parts, ";");
}

// Whitespace-normalized fix answer key.
inline std::string fix_answer_key(const modelgw::ModelResponse& r) {
  std::string out;
  bool in_ws = false;
  for (char c : r.fixed_code) {
    if (is_space(c)) {
      in_ws = true;
      continue;
    }
    if (in_ws && !out.empty()) out += ' ';
    in_ws = false;
    out += c;
  }
  return out;
}

inline json run_record(const modelgw::RunRecord& r) {
  json j;
  j["kind"] = "model-run";
  j["system"] = r.system_id;
  j["attempt"] = r.attempt;
  j["status"] = modelgw::to_string(r.status);
  j["latency_seconds"] = r.latency_seconds;
  j["attempts_used"] = r.attempts_used;
  if (!r.transport_error.empty()) j["transport_error"] = r.transport_error;
  if (r.response) {
    const auto& resp = *r.response;
    json rj;
    rj["result"] = resp.result_text;
    rj["explanation"] = resp.explanation;
    if (!resp.fixed_code.empty()) rj["fixed_code"] = resp.fixed_code;
    if (!resp.fix_description.empty()) rj["fix"] = resp.fix_description;
    rj["wellformed"] = resp.wellformed();
    rj["dropped_result_entries"] = resp.dropped_result_entries;
    j["response"] = rj;
    j["answer_key"] = detection_answer_key(resp);
    j["raw"] = resp.raw;
  }
  if (!r.request_body.empty()) j["request_body"] = r.request_body;
  return j;
}

inline modelgw::RunRecord run_record_from_json(const json& j, modelgw::PromptKind kind) {
  modelgw::RunRecord r;
  r.system_id = j.at("system").get<std::string>();
  r.attempt = j.value("attempt", 1);
  std::string status = j.value("status", "transport");
  r.status = status == "ok"          ? modelgw::ResponseStatus::Ok
             : status == "malformed" ? modelgw::ResponseStatus::Malformed
             : status == "truncated" ? modelgw::ResponseStatus::Truncated
                                     : modelgw::ResponseStatus::Transport;
  r.latency_seconds = j.value("latency_seconds", 0.0);
  r.attempts_used = j.value("attempts_used", 0);
  if (j.contains("raw")) {
    r.response = modelgw::parse_response(j["raw"].get<std::string>(), kind);
  } else if (j.contains("response")) {
    modelgw::ModelResponse resp;
    resp.status = r.status;
    const auto& rj = j["response"];
    modelgw::detail::parse_result_entries(rj.value("result", ""), resp);
    resp.explanation = rj.value("explanation", "");
    resp.fixed_code = rj.value("fixed_code", "");
    resp.fix_description = rj.value("fix", "");
    r.response = std::move(resp);
  }
  return r;
}

inline json fix_record(const evalcore::FixVerdict& v, int attempt, bool variability_preserved) {
  json j;
  j["kind"] = "fix-verdict";
  j["system"] = v.system_id;
  j["attempt"] = attempt;
  j["provided"] = v.provided;
  if (v.provided) {
    j["all_products_compile"] = v.all_products_compile;
    j["refeatured"] = json::array();
    for (const auto& f : v.refeatured) j["refeatured"].push_back(f.name);
    j["failing"] = json::array();
    for (const auto& p : v.failing) j["failing"].push_back(p.canonical());
    j["variability_preserved"] = variability_preserved;
  }
  return j;
}

// ---- JSONL files ----

struct LedgerFile {
  std::vector<json> entries;
  std::set<std::tuple<std::string, std::string, int>> keys;  // (kind, system, attempt)

  static LedgerFile load(const std::string& path) {
    LedgerFile ledger;
    std::ifstream in(path, std::ios::binary);
    if (!in) return ledger;
    std::string line;
    while (std::getline(in, line)) {
      if (trim_view(line).empty()) continue;
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) continue;
      ledger.index(j);
      ledger.entries.push_back(std::move(j));
    }
    return ledger;
  }

  void index(const json& j) {
    keys.insert({j.value("kind", ""), j.value("system", ""), j.value("attempt", 0)});
  }

  bool has(const std::string& kind, const std::string& system, int attempt = 0) const {
    return keys.count({kind, system, attempt}) > 0;
  }

  std::vector<json> of_kind(const std::string& kind) const {
    std::vector<json> out;
    for (const auto& e : entries)
      if (e.value("kind", "") == kind) out.push_back(e);
    return out;
  }
};

// Append-only writer; writes are serialized so pool workers can hand records
// to a single owner.
class LedgerWriter {
 public:
  explicit LedgerWriter(const std::string& path)
      : out_(path, std::ios::binary | std::ios::app) {
    if (!out_) throw std::runtime_error("cannot open ledger for append: " + path);
  }

  void append(json j) {
    std::lock_guard<std::mutex> lock(mutex_);
    out_ << j.dump() << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
  std::mutex mutex_;
};

// Scored stability view from model-run records. Records carrying an explicit
// "correct" flag replay as-is; otherwise correctness is derived from oracle
// verdicts under the detection rule (emptiness match) or, for the fixing
// task, from fix-verdict records.
inline stability::RunLedgerView stability_view_from_runs(
    const std::vector<json>& runs, const std::map<std::string, bool>* truth_has_error) {
  struct Keyed {
    int attempt;
    stability::Answer answer;
  };
  std::map<std::string, std::vector<Keyed>> grouped;
  for (const auto& j : runs) {
    std::string system = j.value("system", "");
    int attempt = j.value("attempt", 1);
    stability::Answer a;
    a.key = j.value("answer_key", "");
    if (j.contains("correct")) {
      a.correct = j["correct"].get<bool>();
    } else if (truth_has_error) {
      auto it = truth_has_error->find(system);
      if (it == truth_has_error->end()) continue;
      a.correct = !a.key.empty() == it->second;
    } else {
      continue;
    }
    grouped[system].push_back({attempt, std::move(a)});
  }
  stability::RunLedgerView view;
  for (auto& [system, list] : grouped) {
    std::sort(list.begin(), list.end(),
              [](const Keyed& x, const Keyed& y) { return x.attempt < y.attempt; });
    for (auto& k : list) view.add(system, std::move(k.answer));
  }
  return view;
}

}  // namespace varcc::ledger
