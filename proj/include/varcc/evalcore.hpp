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

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "varcc/modelgw.hpp"
#include "varcc/oracle.hpp"
#include "varcc/random.hpp"
#include "varcc/stats.hpp"
#include "varcc/varmodel.hpp"

namespace varcc::evalcore {

struct ConfusionMatrix {
  long tp = 0, fp = 0, tn = 0, fn = 0;
  long total() const { return tp + fp + tn + fn; }
};

enum class Detection { TP, FP, TN, FN };

inline const char* to_string(Detection d) {
  switch (d) {
    case Detection::TP: return "TP";
    case Detection::FP: return "FP";
    case Detection::TN: return "TN";
    case Detection::FN: return "FN";
  }
  return "?";
}

struct MismatchedSystem : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Detection classify_detection(bool predicted_positive, bool actual_positive) {
  if (predicted_positive) return actual_positive ? Detection::TP : Detection::FP;
  return actual_positive ? Detection::FN : Detection::TN;
}

// A response predicts "has an error" exactly when its result list is
// nonempty; the oracle's has_error is the actual. Recovered result fields on
// malformed payloads still count.
inline Detection detection_verdict(const modelgw::ModelResponse& response,
                                   const oracle::SystemVerdict& truth) {
  return classify_detection(response.predicted_positive(), truth.has_error);
}

// Record-level variant: checks system identity; Transport/Truncated records
// without a recoverable result score as predicted-negative.
inline Detection detection_verdict(const modelgw::RunRecord& record,
                                   const oracle::SystemVerdict& truth) {
  if (record.system_id != truth.system_id)
    throw MismatchedSystem("run for '" + record.system_id + "' scored against '" +
                           truth.system_id + "'");
  bool predicted = record.response && record.response->predicted_positive();
  return classify_detection(predicted, truth.has_error);
}

inline void tally(ConfusionMatrix& m, Detection d) {
  switch (d) {
    case Detection::TP: ++m.tp; break;
    case Detection::FP: ++m.fp; break;
    case Detection::TN: ++m.tn; break;
    case Detection::FN: ++m.fn; break;
  }
}

struct DetectionMetrics {
  std::optional<double> precision, recall, accuracy, f1;
};

struct EmptyMatrix : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Full-precision metrics; a zero denominator yields the undefined sentinel
// (empty optional). Rounding happens only in reports.
inline DetectionMetrics compute_metrics(const ConfusionMatrix& m) {
  if (m.total() == 0) throw EmptyMatrix("confusion matrix with zero total");
  DetectionMetrics out;
  if (m.tp + m.fp > 0) out.precision = static_cast<double>(m.tp) / (m.tp + m.fp);
  if (m.tp + m.fn > 0) out.recall = static_cast<double>(m.tp) / (m.tp + m.fn);
  out.accuracy = static_cast<double>(m.tp + m.tn) / m.total();
  if (out.precision && out.recall && *out.precision + *out.recall > 0)
    out.f1 = 2.0 * *out.precision * *out.recall / (*out.precision + *out.recall);
  return out;
}

struct FixVerdict {
  std::string system_id;
  bool provided = false;
  bool all_products_compile = false;  // defined only when provided
  std::vector<varmodel::FeatureMacro> refeatured;  // features of the fixed code
  std::vector<varmodel::Product> failing;
  std::vector<oracle::ProductOutcome> outcomes;
};

// A fix is correct iff every product derived from the FIXED code compiles.
// Features are re-extracted from the fixed code, never from the original, so
// later mutation of the original unit cannot change the verdict.
inline FixVerdict evaluate_fix(const varmodel::SourceUnit& unit,
                               const modelgw::ModelResponse& response,
                               const oracle::CompilerSpec& spec, int jobs = 1,
                               int cap = varmodel::kDefaultFeatureCap) {
  FixVerdict verdict;
  verdict.system_id = unit.id;
  if (response.fixed_code.empty()) return verdict;
  verdict.provided = true;
  auto fixed = varmodel::SourceUnit::from_code(unit.id + ".fixed", response.fixed_code);
  auto judged = oracle::judge_system(fixed, spec, jobs, cap);
  verdict.refeatured = judged.features;
  verdict.failing = judged.failing;
  verdict.outcomes = judged.outcomes;
  verdict.all_products_compile = !judged.has_error;
  return verdict;
}

struct AgreementTable {
  long both_correct = 0, a_only = 0, b_only = 0, neither = 0;
  long total() const { return both_correct + a_only + b_only + neither; }
};

struct UniverseMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Quadrant counts for two per-system correctness vectors over the same
// universe (a = first tool, b = second).
inline AgreementTable agreement(const std::map<std::string, bool>& a,
                                const std::map<std::string, bool>& b) {
  if (a.size() != b.size())
    throw UniverseMismatch("correctness vectors differ in size: " + std::to_string(a.size()) +
                           " vs " + std::to_string(b.size()));
  AgreementTable t;
  for (const auto& [id, a_correct] : a) {
    auto it = b.find(id);
    if (it == b.end()) throw UniverseMismatch("system '" + id + "' missing from second vector");
    bool b_correct = it->second;
    if (a_correct && b_correct)
      ++t.both_correct;
    else if (a_correct)
      ++t.a_only;
    else if (b_correct)
      ++t.b_only;
    else
      ++t.neither;
  }
  return t;
}

struct NoDiscordantPairs : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct McNemarResult {
  double statistic = 0.0;   // continuity-corrected chi-square, 1 df
  double p_value = 0.0;     // chi-square survival function of the statistic
  double log10_p = 0.0;     // finite even when p_value underflows
  bool p_underflowed = false;
  std::optional<double> exact_p;        // two-sided exact binomial, when requested
  std::optional<double> exact_log10_p;  // finite bound for the exact route
};

// McNemar's test over the discordant cells (b = a_only, c = b_only) using the
// continuity-corrected chi-square. The exact binomial is the reference
// distribution the chi-square approximates; it is computed on demand and its
// deep-tail values are reported as log10 bounds once they underflow a double.
inline McNemarResult mcnemar(const AgreementTable& table, bool exact_binomial = false) {
  long b = table.a_only, c = table.b_only;
  if (b + c == 0) throw NoDiscordantPairs("McNemar's test needs at least one discordant pair");
  McNemarResult r;
  double diff = std::fabs(static_cast<double>(b) - static_cast<double>(c)) - 1.0;
  if (diff < 0) diff = 0;
  r.statistic = diff * diff / static_cast<double>(b + c);
  r.p_value = stats::chi2_sf_1df(r.statistic);
  r.log10_p = stats::chi2_sf_1df_log10(r.statistic);
  r.p_underflowed = r.p_value == 0.0;
  if (exact_binomial) {
    double lg = stats::binomial_two_sided_log10(b, c);
    r.exact_log10_p = lg;
    r.exact_p = std::pow(10.0, lg);  // 0.0 once past the representable range
  }
  return r;
}

struct ZeroDiscordantCell : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OddsRatioResult {
  double estimate = 0.0;
  double low = 0.0;
  double high = 0.0;
};

// Discordance odds ratio c/b favoring the second tool, with the log-normal
// confidence interval exp(ln(or) +- z*sqrt(1/b + 1/c)). A zero cell throws
// unless the Haldane 0.5 continuity correction is requested.
inline OddsRatioResult odds_ratio(const AgreementTable& table, double confidence = 0.95,
                                  bool continuity_correction = false) {
  double b = static_cast<double>(table.a_only);
  double c = static_cast<double>(table.b_only);
  if (b == 0.0 || c == 0.0) {
    if (!continuity_correction)
      throw ZeroDiscordantCell(
          "zero discordant cell; re-run with the 0.5 continuity correction");
    b += 0.5;
    c += 0.5;
  }
  OddsRatioResult r;
  r.estimate = c / b;
  double z = stats::normal_quantile(0.5 + confidence / 2.0);
  double half_width = z * std::sqrt(1.0 / b + 1.0 / c);
  r.low = std::exp(std::log(r.estimate) - half_width);
  r.high = std::exp(std::log(r.estimate) + half_width);
  return r;
}

struct BadParameters : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StratumOverflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SamplingPlan {
  double z = 0.0, p = 0.0, e = 0.0;
  long population = 0;
  double n0 = 0.0;  // unadjusted size z^2 p (1-p) / e^2
  long n = 0;       // finite-population-corrected size, rounded up
  struct Stratum {
    long population = 0;
    long allocated = 0;
    std::vector<std::string> selected;
  };
  std::map<std::string, Stratum> strata;
};

// Proportion-based sample size with finite population correction:
//   n0 = z^2 p (1-p) / e^2,  n = ceil(n0 / (1 + (n0 - 1) / N)).
inline SamplingPlan sample_size(long N, double z, double p, double e) {
  if (N < 1 || !(e > 0.0 && e < 1.0) || p < 0.0 || p > 1.0 || z <= 0.0)
    throw BadParameters("sample_size: need N >= 1, 0 < e < 1, 0 <= p <= 1, z > 0");
  SamplingPlan plan;
  plan.z = z;
  plan.p = p;
  plan.e = e;
  plan.population = N;
  plan.n0 = z * z * p * (1.0 - p) / (e * e);
  double adjusted = plan.n0 / (1.0 + (plan.n0 - 1.0) / static_cast<double>(N));
  plan.n = static_cast<long>(std::ceil(adjusted - 1e-9));
  if (plan.n < 0) plan.n = 0;
  if (plan.n > N) plan.n = N;
  return plan;
}

// Proportional allocation with largest-remainder rounding (ties broken by
// stratum label), then seeded sampling without replacement inside each
// stratum. Pure function of (plan, strata, seed).
inline SamplingPlan stratified_allocate(const SamplingPlan& sizes,
                                        const std::map<std::string, std::vector<std::string>>& strata,
                                        uint64_t seed) {
  long total = 0;
  for (const auto& [label, members] : strata) total += static_cast<long>(members.size());
  if (total != sizes.population)
    throw BadParameters("strata do not partition the population: " + std::to_string(total) +
                        " members vs N = " + std::to_string(sizes.population));

  SamplingPlan plan = sizes;
  struct Share {
    std::string label;
    long floor_alloc;
    double remainder;
  };
  std::vector<Share> shares;
  long allocated = 0;
  for (const auto& [label, members] : strata) {
    double exact = static_cast<double>(plan.n) * members.size() / total;
    long fl = static_cast<long>(std::floor(exact + 1e-12));
    shares.push_back({label, fl, exact - fl});
    allocated += fl;
  }
  std::sort(shares.begin(), shares.end(), [](const Share& a, const Share& b) {
    if (a.remainder != b.remainder) return a.remainder > b.remainder;
    return a.label < b.label;
  });
  for (size_t i = 0; allocated < plan.n; ++i) {
    ++shares[i % shares.size()].floor_alloc;
    ++allocated;
  }

  uint64_t stratum_index = 0;
  for (const auto& [label, members] : strata) {
    auto it = std::find_if(shares.begin(), shares.end(),
                           [&](const Share& s) { return s.label == label; });
    long take = it->floor_alloc;
    if (take > static_cast<long>(members.size()))
      throw StratumOverflow("allocation " + std::to_string(take) + " exceeds stratum '" + label +
                            "' population " + std::to_string(members.size()));
    SamplingPlan::Stratum st;
    st.population = static_cast<long>(members.size());
    st.allocated = take;
    auto picks = sample_without_replacement(members.size(), static_cast<size_t>(take),
                                            seed ^ (0x9e3779b97f4a7c15ULL * (stratum_index + 1)));
    std::sort(picks.begin(), picks.end());
    for (size_t idx : picks) st.selected.push_back(members[idx]);
    plan.strata[label] = std::move(st);
    ++stratum_index;
  }
  return plan;
}

}  // namespace varcc::evalcore
