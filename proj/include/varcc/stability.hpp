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

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace varcc::stability {

// One scored model answer: the canonical answer key (used for identity
// comparisons) and whether it was correct.
struct Answer {
  std::string key;
  bool correct = false;
};

// Per-system ordered run lists. Aggregations use the first k runs of every
// system; extra runs beyond k are ignored, never subsampled.
struct RunLedgerView {
  std::map<std::string, std::vector<Answer>> systems;

  void add(const std::string& system, Answer a) { systems[system].push_back(std::move(a)); }
};

struct InsufficientRuns : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require_k(const RunLedgerView& view, int k) {
  if (k < 1) throw InsufficientRuns("k must be >= 1");
  if (view.systems.empty()) throw InsufficientRuns("empty run ledger");
  for (const auto& [id, runs] : view.systems)
    if (static_cast<int>(runs.size()) < k)
      throw InsufficientRuns("system '" + id + "' has " + std::to_string(runs.size()) +
                             " runs, need " + std::to_string(k));
}

}  // namespace detail

// Mean over systems of (correct count among the first k) / k.
inline double mean_accuracy(const RunLedgerView& view, int k) {
  detail::require_k(view, k);
  double sum = 0.0;
  for (const auto& [id, runs] : view.systems) {
    int correct = 0;
    for (int j = 0; j < k; ++j) correct += runs[j].correct ? 1 : 0;
    sum += static_cast<double>(correct) / k;
  }
  return sum / view.systems.size();
}

// Share of systems with at least one correct answer among the first k.
inline double pass_at_k(const RunLedgerView& view, int k) {
  detail::require_k(view, k);
  long hits = 0;
  for (const auto& [id, runs] : view.systems)
    for (int j = 0; j < k; ++j)
      if (runs[j].correct) {
        ++hits;
        break;
      }
  return static_cast<double>(hits) / view.systems.size();
}

// Share of systems whose first k answer keys are all identical, regardless of
// correctness.
inline double tar_at_k(const RunLedgerView& view, int k) {
  detail::require_k(view, k);
  long identical = 0;
  for (const auto& [id, runs] : view.systems) {
    bool same = true;
    for (int j = 1; j < k; ++j)
      if (runs[j].key != runs[0].key) {
        same = false;
        break;
      }
    if (same) ++identical;
  }
  return static_cast<double>(identical) / view.systems.size();
}

// Share of systems whose unique most frequent answer among the first k is
// correct. A tie for the mode scores 0 for that system.
inline double cons_at_k(const RunLedgerView& view, int k) {
  detail::require_k(view, k);
  long hits = 0;
  for (const auto& [id, runs] : view.systems) {
    std::map<std::string, int> counts;
    for (int j = 0; j < k; ++j) ++counts[runs[j].key];
    int best = 0;
    for (const auto& [key, n] : counts) best = std::max(best, n);
    std::string mode;
    int at_best = 0;
    for (const auto& [key, n] : counts)
      if (n == best) {
        ++at_best;
        mode = key;
      }
    if (at_best != 1) continue;
    for (int j = 0; j < k; ++j)
      if (runs[j].key == mode) {
        if (runs[j].correct) ++hits;
        break;
      }
  }
  return static_cast<double>(hits) / view.systems.size();
}

// Accuracy of attempt index j (1-based) alone, over all systems.
inline double attempt_accuracy(const RunLedgerView& view, int j) {
  detail::require_k(view, j);
  long correct = 0;
  for (const auto& [id, runs] : view.systems) correct += runs[j - 1].correct ? 1 : 0;
  return static_cast<double>(correct) / view.systems.size();
}

// Max minus min of per-attempt accuracy over attempts 1..k.
inline double accuracy_spread(const RunLedgerView& view, int k) {
  detail::require_k(view, k);
  double lo = 1.0, hi = 0.0;
  for (int j = 1; j <= k; ++j) {
    double a = attempt_accuracy(view, j);
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  return hi - lo;
}

struct StabilityReport {
  int k = 0;
  double mean_accuracy = 0.0;
  double pass_at_k = 0.0;
  double tar_at_k = 0.0;
  double cons_at_k = 0.0;
  double accuracy_spread = 0.0;
  double attempt_accuracy = 0.0;  // accuracy of attempt k alone, the figure's per-k series
};

inline std::vector<StabilityReport> stability_table(const RunLedgerView& view, int max_k) {
  std::vector<StabilityReport> out;
  for (int k = 1; k <= max_k; ++k) {
    StabilityReport r;
    r.k = k;
    r.mean_accuracy = mean_accuracy(view, k);
    r.pass_at_k = pass_at_k(view, k);
    r.tar_at_k = tar_at_k(view, k);
    r.cons_at_k = cons_at_k(view, k);
    r.accuracy_spread = accuracy_spread(view, k);
    r.attempt_accuracy = attempt_accuracy(view, k);
    out.push_back(r);
  }
  return out;
}

}  // namespace varcc::stability
