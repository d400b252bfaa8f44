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
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "varcc/changeset.hpp"
#include "varcc/dataset.hpp"
#include "varcc/evalcore.hpp"
#include "varcc/gateway.hpp"
#include "varcc/ledger.hpp"
#include "varcc/oracle.hpp"
#include "varcc/stability.hpp"

namespace varcc::cli {

// Exit codes: 0 success, 1 usage error, 2 data error, 3 environment error
// (compiler or endpoint unavailable).
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitEnvironment = 3;

using json = nlohmann::ordered_json;

namespace detail {

struct CompilerOptions {
  std::string cc;
  std::string std_tag = "c99";
  std::vector<std::string> extra_flags;
  double timeout = 10.0;
  int cap = varmodel::kDefaultFeatureCap;

  void attach(CLI::App* app) {
    app->add_option("--cc", cc, "C compiler executable (default: clang, gcc, or cc)");
    app->add_option("--std", std_tag, "language standard")->capture_default_str();
    app->add_option("--cflag", extra_flags, "extra compiler flag (repeatable)");
    app->add_option("--timeout", timeout, "per-product compile timeout in seconds")
        ->capture_default_str();
    app->add_option("--cap", cap, "feature enumeration cap")->capture_default_str();
  }

  oracle::CompilerSpec resolve() const {
    oracle::CompilerSpec spec = oracle::resolve_compiler(cc, std_tag);
    spec.extra_flags = extra_flags;
    spec.timeout_seconds = timeout;
    return spec;
  }
};

struct ModelOptions {
  std::string endpoint;
  std::string model = "gpt-oss-20b";
  std::string provider = "openai-chat";
  std::string api_key_env;
  std::string preset = "local";
  double temperature = -1.0;
  int retries = -1;
  double backoff = -1.0;
  double timeout = 300.0;
  int max_tokens = 0;
  double rps = 0.0;

  void attach(CLI::App* app) {
    app->add_option("--endpoint", endpoint, "chat-completion service address")->required();
    app->add_option("--model", model, "model name")->capture_default_str();
    app->add_option("--provider", provider, "wire-shape adapter")->capture_default_str();
    app->add_option("--api-key-env", api_key_env,
                    "environment variable holding the API key");
    app->add_option("--preset", preset, "config preset: local or remote")
        ->check(CLI::IsMember({"local", "remote"}))
        ->capture_default_str();
    app->add_option("--temperature", temperature, "sampling temperature (preset default)");
    app->add_option("--retries", retries, "max transport retries (preset default)");
    app->add_option("--backoff", backoff, "backoff base in seconds (preset default)");
    app->add_option("--request-timeout", timeout, "request timeout in seconds")
        ->capture_default_str();
    app->add_option("--max-tokens", max_tokens, "max tokens (0 = provider default)");
    app->add_option("--rps", rps, "request rate limit per second (0 = unlimited)");
  }

  modelgw::ModelConfig resolve() const {
    modelgw::ModelConfig cfg = preset == "remote" ? modelgw::ModelConfig::remote_defaults()
                                                  : modelgw::ModelConfig::local_defaults();
    cfg.endpoint = endpoint;
    cfg.model = model;
    cfg.provider = provider;
    cfg.api_key_env = api_key_env;
    if (temperature >= 0.0) cfg.temperature = temperature;
    if (retries >= 0) cfg.max_retries = retries;
    if (backoff >= 0.0) cfg.backoff_base_seconds = backoff;
    cfg.request_timeout_seconds = timeout;
    if (max_tokens > 0) cfg.max_tokens = max_tokens;
    cfg.requests_per_second = rps;
    return cfg;
  }
};

inline double round2(double x) { return std::round(x * 100.0) / 100.0; }

inline json metrics_json(const evalcore::DetectionMetrics& m) {
  json j;
  auto put = [&](const char* name, const std::optional<double>& v) {
    if (v) {
      j[name] = *v;
      j[std::string(name) + "_2dp"] = round2(*v);
    } else {
      j[name] = nullptr;
    }
  };
  put("precision", m.precision);
  put("recall", m.recall);
  put("accuracy", m.accuracy);
  put("f1", m.f1);
  return j;
}

inline json confusion_json(const evalcore::ConfusionMatrix& m) {
  return json{{"tp", m.tp}, {"fp", m.fp}, {"tn", m.tn}, {"fn", m.fn}, {"total", m.total()}};
}

inline void write_report(const std::string& path, const json& j) {
  dataset::write_file(path, j.dump(2) + "\n");
}

inline std::map<std::string, oracle::SystemVerdict> load_verdicts(const std::string& path) {
  std::map<std::string, oracle::SystemVerdict> out;
  auto ledger = ledger::LedgerFile::load(path);
  for (const auto& e : ledger.of_kind("oracle")) {
    if (e.contains("failure")) continue;
    auto v = ledger::verdict_from_record(e);
    out[v.system_id] = std::move(v);
  }
  return out;
}

// Two-column delimited tool verdict file: `system id <sep> has_error flag`.
inline std::map<std::string, bool> load_tool_verdicts(const std::string& path) {
  std::map<std::string, bool> out;
  std::string text = dataset::read_file(path);
  for (const auto& line : split_lines(text)) {
    std::string_view t = trim_view(line);
    if (t.empty() || t[0] == '#') continue;
    size_t sep = t.find_first_of("\t,;");
    if (sep == std::string_view::npos)
      throw dataset::DatasetError("tool verdict line lacks a separator: " + std::string(t));
    std::string id = trim(t.substr(0, sep));
    std::string flag = to_lower(trim(t.substr(sep + 1)));
    bool has_error;
    if (flag == "1" || flag == "true" || flag == "error" || flag == "errors")
      has_error = true;
    else if (flag == "0" || flag == "false" || flag == "ok" || flag == "compiles")
      has_error = false;
    else
      throw dataset::DatasetError("bad has_error flag '" + flag + "' for system " + id);
    out[id] = has_error;
  }
  return out;
}

}  // namespace detail

// ---- subcommand bodies ----

inline int cmd_oracle(const std::string& dataset_path, const std::string& out_path,
                      const detail::CompilerOptions& copts, int jobs) {
  auto rows = dataset::load_dataset(dataset_path);
  auto spec = copts.resolve();
  auto existing = ledger::LedgerFile::load(out_path);
  ledger::LedgerWriter writer(out_path);

  struct RowResult {
    json record;
    bool fresh = false;
  };
  std::vector<RowResult> results(rows.size());
  oracle::detail::parallel_for(rows.size(), jobs, [&](size_t i) {
    const auto& row = rows[i];
    if (existing.has("oracle", row.id)) return;
    json record;
    try {
      auto unit = varmodel::SourceUnit::from_code(row.id, row.code);
      auto verdict = oracle::judge_system(unit, spec, 1, copts.cap);
      record = ledger::verdict_record(verdict);
    } catch (const oracle::CompilerNotFound&) {
      throw;
    } catch (const std::exception& e) {
      record = json{{"kind", "oracle"}, {"system", row.id}, {"failure", e.what()}};
    }
    record["claimed"] = dataset::to_string(row.label);
    record["timestamp"] = ledger::iso8601_now();
    results[i] = RowResult{std::move(record), true};
  });
  for (auto& r : results)
    if (r.fresh) writer.append(std::move(r.record));

  // Summary over the full ledger (old entries included).
  auto all = ledger::LedgerFile::load(out_path).of_kind("oracle");
  long judged = 0, has_error = 0, failures = 0, labeled = 0, drift = 0;
  for (const auto& e : all) {
    if (e.contains("failure")) {
      ++failures;
      continue;
    }
    ++judged;
    bool err = e.value("has_error", false);
    if (err) ++has_error;
    std::string claimed = e.value("claimed", "unknown");
    if (claimed == "compiles" || claimed == "errors") {
      ++labeled;
      if ((claimed == "errors") != err) ++drift;
    }
  }
  std::cout << "judged=" << judged << " has_error=" << has_error << " failures=" << failures;
  if (labeled > 0) {
    std::ostringstream rate;
    rate.setf(std::ios::fixed);
    rate.precision(4);
    rate << static_cast<double>(drift) / labeled;
    std::cout << " label_drift=" << rate.str() << " (" << drift << "/" << labeled << ")";
  }
  std::cout << "\n";
  return kExitOk;
}

inline int cmd_detect(const std::string& dataset_path, const std::string& out_path,
                      const detail::ModelOptions& mopts, modelgw::PromptKind kind, int runs,
                      int jobs) {
  auto rows = dataset::load_dataset(dataset_path);
  auto cfg = mopts.resolve();
  auto existing = ledger::LedgerFile::load(out_path);
  ledger::LedgerWriter writer(out_path);
  modelgw::RateLimiter limiter(cfg.requests_per_second);

  struct Task {
    size_t row;
    int attempt;
  };
  std::vector<Task> tasks;
  for (size_t i = 0; i < rows.size(); ++i)
    for (int k = 1; k <= runs; ++k)
      if (!existing.has("model-run", rows[i].id, k)) tasks.push_back({i, k});

  std::vector<json> records(tasks.size());
  oracle::detail::parallel_for(tasks.size(), jobs, [&](size_t t) {
    const auto& row = rows[tasks[t].row];
    std::string prompt = modelgw::build_prompt(kind, row.code);
    auto record = modelgw::request(cfg, prompt, row.id, tasks[t].attempt, kind, &limiter);
    json j = ledger::run_record(record);
    j["timestamp"] = ledger::iso8601_now();
    records[t] = std::move(j);
  });
  long transport_failures = 0;
  for (auto& j : records) {
    if (j.value("status", "") == "transport") ++transport_failures;
    writer.append(std::move(j));
  }
  std::cout << "requested=" << tasks.size() << " skipped=" << (rows.size() * runs - tasks.size())
            << " transport_failures=" << transport_failures << "\n";
  return kExitOk;
}

inline int cmd_diff_detect(const std::vector<std::string>& diff_paths, const std::string& out_path,
                           const detail::ModelOptions& mopts, int runs, int jobs) {
  auto cfg = mopts.resolve();
  auto existing = ledger::LedgerFile::load(out_path);
  ledger::LedgerWriter writer(out_path);
  modelgw::RateLimiter limiter(cfg.requests_per_second);

  struct Task {
    std::string id;
    std::string text;
    int attempt;
  };
  std::vector<Task> tasks;
  for (const auto& path : diff_paths) {
    std::string text = dataset::read_file(path);
    changeset::parse_diff(text);  // validate before spending requests
    std::string id = std::filesystem::path(path).stem().string();
    for (int k = 1; k <= runs; ++k)
      if (!existing.has("model-run", id, k)) tasks.push_back({id, text, k});
  }
  std::vector<json> records(tasks.size());
  oracle::detail::parallel_for(tasks.size(), jobs, [&](size_t t) {
    std::string prompt = modelgw::build_prompt(modelgw::PromptKind::Diff, tasks[t].text);
    auto record =
        modelgw::request(cfg, prompt, tasks[t].id, tasks[t].attempt, modelgw::PromptKind::Diff,
                         &limiter);
    json j = ledger::run_record(record);
    j["timestamp"] = ledger::iso8601_now();
    records[t] = std::move(j);
  });
  for (auto& j : records) writer.append(std::move(j));
  std::cout << "requested=" << tasks.size() << "\n";
  return kExitOk;
}

inline int cmd_fix_eval(const std::string& runs_path, const std::string& dataset_path,
                        const std::string& oracle_path, const std::string& out_path,
                        const detail::CompilerOptions& copts, int jobs) {
  auto rows = dataset::load_dataset(dataset_path);
  std::map<std::string, const dataset::DatasetRow*> by_id;
  for (const auto& r : rows) by_id[r.id] = &r;
  auto verdicts = detail::load_verdicts(oracle_path);
  auto spec = copts.resolve();

  auto runs = ledger::LedgerFile::load(runs_path).of_kind("model-run");
  auto existing = ledger::LedgerFile::load(out_path);
  ledger::LedgerWriter writer(out_path);

  struct Task {
    std::string system;
    int attempt;
    modelgw::ModelResponse response;
  };
  std::vector<Task> tasks;
  for (const auto& j : runs) {
    auto record = ledger::run_record_from_json(j, modelgw::PromptKind::FullCode);
    if (!record.response || record.response->fixed_code.empty()) continue;
    if (!by_id.count(record.system_id)) continue;
    if (existing.has("fix-verdict", record.system_id, record.attempt)) continue;
    tasks.push_back({record.system_id, record.attempt, *record.response});
  }
  std::vector<json> records(tasks.size());
  oracle::detail::parallel_for(tasks.size(), jobs, [&](size_t t) {
    const auto& task = tasks[t];
    auto unit = varmodel::SourceUnit::from_code(task.system, by_id[task.system]->code);
    json j;
    try {
      auto verdict = evalcore::evaluate_fix(unit, task.response, spec, 1, copts.cap);
      auto original_scan = varmodel::scan_directives(unit.code);
      bool had_features = !varmodel::extract_features(original_scan).empty();
      bool preserved = !had_features || !verdict.refeatured.empty();
      j = ledger::fix_record(verdict, task.attempt, preserved);
    } catch (const std::exception& e) {
      j = json{{"kind", "fix-verdict"},
               {"system", task.system},
               {"attempt", task.attempt},
               {"provided", true},
               {"failure", e.what()}};
    }
    j["timestamp"] = ledger::iso8601_now();
    records[t] = std::move(j);
  });
  for (auto& j : records) writer.append(std::move(j));

  // The paper's two denominators: (a) fixes expected by the baseline,
  // (b) all generated fixes.
  auto all = ledger::LedgerFile::load(out_path).of_kind("fix-verdict");
  long expected_cases = 0, expected_correct = 0, generated = 0, generated_correct = 0;
  for (const auto& e : all) {
    if (!e.value("provided", false) || e.contains("failure")) continue;
    bool ok = e.value("all_products_compile", false);
    ++generated;
    if (ok) ++generated_correct;
    auto it = verdicts.find(e.value("system", ""));
    if (it != verdicts.end() && it->second.has_error) {
      ++expected_cases;
      if (ok) ++expected_correct;
    }
  }
  auto rate = [](long num, long den) -> std::string {
    if (den == 0) return "n/a";
    std::ostringstream ss;
    ss.setf(std::ios::fixed);
    ss.precision(3);
    ss << static_cast<double>(num) / den;
    return ss.str();
  };
  std::cout << "fix_correct_over_expected=" << rate(expected_correct, expected_cases) << " ("
            << expected_correct << "/" << expected_cases << ")"
            << " compiled_over_generated=" << rate(generated_correct, generated) << " ("
            << generated_correct << "/" << generated << ")\n";
  return kExitOk;
}

inline int cmd_metrics(const std::string& runs_path, const std::string& oracle_path,
                       const std::string& out_path, int attempt) {
  auto verdicts = detail::load_verdicts(oracle_path);
  auto runs = ledger::LedgerFile::load(runs_path).of_kind("model-run");
  evalcore::ConfusionMatrix matrix;
  long malformed = 0, truncated = 0, transport = 0, scored = 0, skipped = 0;
  for (const auto& j : runs) {
    if (j.value("attempt", 1) != attempt) continue;
    auto record = ledger::run_record_from_json(j, modelgw::PromptKind::FullCode);
    auto it = verdicts.find(record.system_id);
    if (it == verdicts.end()) {
      ++skipped;
      continue;
    }
    switch (record.status) {
      case modelgw::ResponseStatus::Malformed: ++malformed; break;
      case modelgw::ResponseStatus::Truncated: ++truncated; break;
      case modelgw::ResponseStatus::Transport: ++transport; break;
      default: break;
    }
    evalcore::tally(matrix, evalcore::detection_verdict(record, it->second));
    ++scored;
  }
  if (scored == 0) {
    std::cerr << "no scorable runs for attempt " << attempt << "\n";
    return kExitData;
  }
  auto metrics = evalcore::compute_metrics(matrix);
  json report;
  report["attempt"] = attempt;
  report["confusion"] = detail::confusion_json(matrix);
  report["metrics"] = detail::metrics_json(metrics);
  report["parse_failures"] =
      json{{"malformed", malformed}, {"truncated", truncated}, {"transport", transport}};
  report["skipped_without_verdict"] = skipped;
  detail::write_report(out_path, report);
  std::cout << report["metrics"].dump() << "\n";
  return kExitOk;
}

inline int cmd_stability(const std::string& runs_path, const std::string& oracle_path,
                         const std::string& out_path, int max_k) {
  auto runs = ledger::LedgerFile::load(runs_path).of_kind("model-run");
  std::map<std::string, bool> truth;
  const std::map<std::string, bool>* truth_ptr = nullptr;
  if (!oracle_path.empty()) {
    for (const auto& [id, v] : detail::load_verdicts(oracle_path)) truth[id] = v.has_error;
    truth_ptr = &truth;
  }
  auto view = ledger::stability_view_from_runs(runs, truth_ptr);
  if (view.systems.empty()) {
    std::cerr << "no scored runs in ledger\n";
    return kExitData;
  }
  auto table = stability::stability_table(view, max_k);
  json report = json::array();
  std::cout << "k mean_accuracy pass@k tar@k cons@k attempt_accuracy spread\n";
  for (const auto& r : table) {
    report.push_back(json{{"k", r.k},
                          {"mean_accuracy", r.mean_accuracy},
                          {"pass_at_k", r.pass_at_k},
                          {"tar_at_k", r.tar_at_k},
                          {"cons_at_k", r.cons_at_k},
                          {"attempt_accuracy", r.attempt_accuracy},
                          {"accuracy_spread", r.accuracy_spread}});
    std::ostringstream row;
    row.setf(std::ios::fixed);
    row.precision(4);
    row << r.k << " " << r.mean_accuracy << " " << r.pass_at_k << " " << r.tar_at_k << " "
        << r.cons_at_k << " " << r.attempt_accuracy << " " << r.accuracy_spread;
    std::cout << row.str() << "\n";
  }
  if (!out_path.empty()) detail::write_report(out_path, report);
  return kExitOk;
}

inline int cmd_sample(long population, const std::string& oracle_path, double confidence,
                      double z_override, double proportion, double margin, uint64_t seed,
                      const std::string& out_path) {
  double z = z_override > 0.0 ? z_override : stats::normal_quantile(0.5 + confidence / 2.0);

  std::map<std::string, std::vector<std::string>> strata;
  if (!oracle_path.empty()) {
    auto verdicts = detail::load_verdicts(oracle_path);
    for (const auto& [id, v] : verdicts)
      strata[v.has_error ? "nocompile" : "compile"].push_back(id);
    long total = 0;
    for (auto& [label, members] : strata) {
      std::sort(members.begin(), members.end());
      total += static_cast<long>(members.size());
    }
    if (population == 0) population = total;
  }
  if (population < 1) {
    std::cerr << "need --population or --oracle\n";
    return kExitUsage;
  }
  auto plan = evalcore::sample_size(population, z, proportion, margin);
  if (!strata.empty()) plan = evalcore::stratified_allocate(plan, strata, seed);

  json report;
  report["z"] = plan.z;
  report["p"] = plan.p;
  report["e"] = plan.e;
  report["population"] = plan.population;
  report["n0"] = plan.n0;
  report["n"] = plan.n;
  report["seed"] = seed;
  if (!plan.strata.empty()) {
    json sj;
    for (const auto& [label, st] : plan.strata)
      sj[label] = json{{"population", st.population},
                       {"allocated", st.allocated},
                       {"selected", st.selected}};
    report["strata"] = sj;
  }
  if (!out_path.empty()) detail::write_report(out_path, report);
  std::cout << "n0=" << plan.n0 << " n=" << plan.n;
  for (const auto& [label, st] : plan.strata)
    std::cout << " " << label << "=" << st.allocated << "/" << st.population;
  std::cout << "\n";
  return kExitOk;
}

inline int cmd_compare(const std::string& quadrants, const std::string& oracle_path,
                       const std::string& runs_path, const std::string& tool_path,
                       double confidence, const std::string& out_path, int attempt) {
  evalcore::AgreementTable table;
  json report;
  if (!quadrants.empty()) {
    auto parts = split(quadrants, ',');
    if (parts.size() != 4) {
      std::cerr << "--quadrants wants both,a_only,b_only,neither\n";
      return kExitUsage;
    }
    table.both_correct = std::stol(trim(parts[0]));
    table.a_only = std::stol(trim(parts[1]));
    table.b_only = std::stol(trim(parts[2]));
    table.neither = std::stol(trim(parts[3]));
  } else {
    auto verdicts = detail::load_verdicts(oracle_path);
    auto tool = detail::load_tool_verdicts(tool_path);
    auto runs = ledger::LedgerFile::load(runs_path).of_kind("model-run");

    std::map<std::string, bool> tool_correct, model_correct;
    evalcore::ConfusionMatrix tool_matrix, model_matrix;
    for (const auto& j : runs) {
      if (j.value("attempt", 1) != attempt) continue;
      auto record = ledger::run_record_from_json(j, modelgw::PromptKind::FullCode);
      auto vt = verdicts.find(record.system_id);
      auto tt = tool.find(record.system_id);
      if (vt == verdicts.end() || tt == tool.end()) continue;
      auto model_verdict = evalcore::detection_verdict(record, vt->second);
      evalcore::tally(model_matrix, model_verdict);
      model_correct[record.system_id] = model_verdict == evalcore::Detection::TP ||
                                        model_verdict == evalcore::Detection::TN;
      auto tool_verdict = evalcore::classify_detection(tt->second, vt->second.has_error);
      evalcore::tally(tool_matrix, tool_verdict);
      tool_correct[record.system_id] = tool_verdict == evalcore::Detection::TP ||
                                       tool_verdict == evalcore::Detection::TN;
    }
    if (model_correct.empty()) {
      std::cerr << "no overlapping systems between runs, oracle, and tool file\n";
      return kExitData;
    }
    table = evalcore::agreement(tool_correct, model_correct);
    report["tool_confusion"] = detail::confusion_json(tool_matrix);
    report["tool_metrics"] = detail::metrics_json(evalcore::compute_metrics(tool_matrix));
    report["model_confusion"] = detail::confusion_json(model_matrix);
    report["model_metrics"] = detail::metrics_json(evalcore::compute_metrics(model_matrix));
  }

  report["agreement"] = json{{"both_correct", table.both_correct},
                             {"a_only", table.a_only},
                             {"b_only", table.b_only},
                             {"neither", table.neither},
                             {"total", table.total()}};
  auto mc = evalcore::mcnemar(table, /*exact_binomial=*/true);
  json mcj;
  mcj["statistic"] = mc.statistic;
  mcj["p_value"] = mc.p_value;
  mcj["log10_p"] = mc.log10_p;
  if (mc.exact_log10_p) {
    mcj["exact_log10_p"] = *mc.exact_log10_p;
    // Deep-tail values beneath the representable range are reported as a
    // power-of-ten upper bound rather than a raw 0.
    if (*mc.exact_p == 0.0)
      mcj["exact_p_bound"] = "p < 1e" + std::to_string(static_cast<long>(std::floor(*mc.exact_log10_p)) + 1);
    else
      mcj["exact_p"] = *mc.exact_p;
  }
  report["mcnemar"] = mcj;
  auto orr = evalcore::odds_ratio(table, confidence);
  report["odds_ratio"] =
      json{{"estimate", orr.estimate}, {"low", orr.low}, {"high", orr.high},
           {"confidence", confidence}};
  if (!out_path.empty()) detail::write_report(out_path, report);
  std::ostringstream line;
  line.setf(std::ios::fixed);
  line.precision(2);
  line << "agreement=(" << table.both_correct << "," << table.a_only << "," << table.b_only << ","
       << table.neither << ") odds_ratio=" << orr.estimate << " [" << orr.low << ", " << orr.high
       << "] mcnemar=" << mc.statistic;
  std::cout << line.str() << " p=" << mc.p_value << "\n";
  return kExitOk;
}

inline int cmd_mutate(const std::string& diff_path, int count, uint64_t seed,
                      const std::string& out_dir, const std::string& base_path,
                      const detail::CompilerOptions& copts, bool verify, int jobs) {
  std::string text = dataset::read_file(diff_path);
  auto diff = changeset::parse_diff(text);
  std::string origin = std::filesystem::path(diff_path).stem().string();
  auto mutants = changeset::generate_mutants(diff, count, seed, origin);

  std::filesystem::create_directories(out_dir);
  json report;
  report["origin"] = origin;
  report["seed"] = seed;
  report["mutants"] = json::array();
  for (size_t i = 0; i < mutants.size(); ++i) {
    const auto& m = mutants[i];
    std::string name = origin + "." + changeset::to_string(m.op) + "." + std::to_string(i) +
                       ".patch";
    std::string path = (std::filesystem::path(out_dir) / name).string();
    dataset::write_file(path, changeset::render_diff(m.mutated));
    report["mutants"].push_back(json{{"file", name}, {"op", changeset::to_string(m.op)}});
    std::cout << path << "\n";
  }

  if (verify) {
    if (base_path.empty()) {
      std::cerr << "--verify needs --base\n";
      return kExitUsage;
    }
    auto spec = copts.resolve();
    std::string base = dataset::read_file(base_path);
    auto judge_text = [&](const std::string& id, const std::string& code) {
      auto unit = varmodel::SourceUnit::from_code(id, code);
      return oracle::judge_system(unit, spec, jobs, copts.cap);
    };
    std::string origin_post = changeset::apply_change(diff.files.at(0), base);
    auto origin_verdict = judge_text(origin + ".post", origin_post);
    report["origin_compiles_all_products"] = !origin_verdict.has_error;
    long killed = 0;
    for (size_t i = 0; i < mutants.size(); ++i) {
      std::string post = changeset::apply_change(mutants[i].mutated.files.at(0), base);
      bool dead;
      try {
        dead = judge_text(origin + ".mutant" + std::to_string(i), post).has_error;
      } catch (const varmodel::ScanError&) {
        dead = true;  // malformed-directive path counts as detected
      }
      report["mutants"][i]["killed"] = dead;
      if (dead) ++killed;
    }
    report["kill_rate"] =
        mutants.empty() ? 0.0 : static_cast<double>(killed) / static_cast<double>(mutants.size());
    std::cout << "killed=" << killed << "/" << mutants.size() << "\n";
  }
  dataset::write_file((std::filesystem::path(out_dir) / (origin + ".mutants.json")).string(),
                      report.dump(2) + "\n");
  return kExitOk;
}

inline int cmd_extract(const std::string& file_path, bool as_json) {
  std::string code = dataset::read_file(file_path);
  auto scan = varmodel::scan_directives(code);
  auto features = varmodel::extract_features(scan);
  if (as_json) {
    json j;
    j["features"] = json::array();
    for (const auto& f : features) j["features"].push_back(f.name);
    j["defines"] = scan.defines;
    json flags;
    flags["value_context"] = json::array();
    for (const auto& m : scan.value_context) flags["value_context"].push_back(m);
    flags["non_boolean"] = json::array();
    for (const auto& m : scan.non_boolean) flags["non_boolean"].push_back(m);
    j["flags"] = flags;
    std::cout << j.dump(2) << "\n";
  } else {
    for (const auto& f : features) {
      std::cout << f.name;
      if (scan.non_boolean.count(f.name))
        std::cout << "  # non-boolean use";
      else if (scan.value_context.count(f.name))
        std::cout << "  # value-context use";
      std::cout << "\n";
    }
  }
  return kExitOk;
}

inline int cmd_enumerate(const std::string& file_path, const std::string& macro_list, int cap) {
  std::vector<varmodel::FeatureMacro> features;
  if (!file_path.empty()) {
    auto scan = varmodel::scan_directives(dataset::read_file(file_path));
    features = varmodel::extract_features(scan);
  } else {
    for (const auto& name : split(macro_list, ',')) {
      std::string n = trim(name);
      if (n.empty()) continue;
      if (!is_c_identifier(n)) throw varmodel::BadProductSyntax("bad macro name '" + n + "'");
      features.push_back(varmodel::FeatureMacro{n});
    }
  }
  for (const auto& p : varmodel::enumerate_products(features, cap)) {
    std::string c = p.canonical();
    std::cout << (c.empty() ? "(empty product)" : c) << "\n";
  }
  return kExitOk;
}

// ---- argument wiring ----

inline int run_cli(int argc, const char* const* argv) {
  CLI::App app{"variability-aware compilation analysis harness"};
  app.require_subcommand(1);

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle", "compile every product of every system");
  std::string o_dataset, o_out;
  int o_jobs = 1;
  detail::CompilerOptions o_copts;
  oracle_cmd->add_option("--dataset", o_dataset, "dataset CSV (id,code,label)")->required();
  oracle_cmd->add_option("--out", o_out, "verdict ledger path (JSONL, append)")->required();
  oracle_cmd->add_option("--jobs", o_jobs, "parallel systems")->capture_default_str();
  o_copts.attach(oracle_cmd);

  // detect
  auto* detect_cmd = app.add_subcommand("detect", "run the detection prompt over a dataset");
  std::string d_dataset, d_out, d_kind = "fullcode";
  int d_runs = 1, d_jobs = 1;
  detail::ModelOptions d_mopts;
  detect_cmd->add_option("--dataset", d_dataset, "dataset CSV")->required();
  detect_cmd->add_option("--out", d_out, "run ledger path")->required();
  detect_cmd->add_option("--kind", d_kind, "prompt kind")
      ->check(CLI::IsMember({"fullcode", "diff"}))
      ->capture_default_str();
  detect_cmd->add_option("--runs", d_runs, "repeated runs per system (k)")->capture_default_str();
  detect_cmd->add_option("--jobs", d_jobs, "in-flight requests")->capture_default_str();
  d_mopts.attach(detect_cmd);

  // diff-detect
  auto* dd_cmd = app.add_subcommand("diff-detect", "run the diff prompt over commit diffs");
  std::vector<std::string> dd_diffs;
  std::string dd_out;
  int dd_runs = 1, dd_jobs = 1;
  detail::ModelOptions dd_mopts;
  dd_cmd->add_option("--diff", dd_diffs, "unified diff file (repeatable)")->required();
  dd_cmd->add_option("--out", dd_out, "run ledger path")->required();
  dd_cmd->add_option("--runs", dd_runs, "repeated runs per diff")->capture_default_str();
  dd_cmd->add_option("--jobs", dd_jobs, "in-flight requests")->capture_default_str();
  dd_mopts.attach(dd_cmd);

  // fix-eval
  auto* fix_cmd = app.add_subcommand("fix-eval", "compile every product of every proposed fix");
  std::string f_runs, f_dataset, f_oracle, f_out;
  int f_jobs = 1;
  detail::CompilerOptions f_copts;
  fix_cmd->add_option("--runs", f_runs, "model run ledger")->required();
  fix_cmd->add_option("--dataset", f_dataset, "dataset CSV")->required();
  fix_cmd->add_option("--oracle", f_oracle, "oracle verdict ledger")->required();
  fix_cmd->add_option("--out", f_out, "fix ledger path")->required();
  fix_cmd->add_option("--jobs", f_jobs, "parallel fixes")->capture_default_str();
  f_copts.attach(fix_cmd);

  // metrics
  auto* metrics_cmd = app.add_subcommand("metrics", "confusion matrix and detection metrics");
  std::string m_runs, m_oracle, m_out;
  int m_attempt = 1;
  metrics_cmd->add_option("--runs", m_runs, "model run ledger")->required();
  metrics_cmd->add_option("--oracle", m_oracle, "oracle verdict ledger")->required();
  metrics_cmd->add_option("--out", m_out, "report path")->required();
  metrics_cmd->add_option("--attempt", m_attempt, "attempt index to score")
      ->capture_default_str();

  // stability
  auto* stab_cmd = app.add_subcommand("stability", "accuracy and stability metrics over k runs");
  std::string s_runs, s_oracle, s_out;
  int s_k = 5;
  stab_cmd->add_option("--runs", s_runs, "model run ledger")->required();
  stab_cmd->add_option("--oracle", s_oracle,
                       "oracle verdict ledger (optional when runs carry 'correct')");
  stab_cmd->add_option("--out", s_out, "report path");
  stab_cmd->add_option("--k", s_k, "maximum k")->capture_default_str();

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "stratified sampling plan");
  long sp_population = 0;
  std::string sp_oracle, sp_out;
  double sp_confidence = 0.95, sp_z = 0.0, sp_p = 0.5, sp_e = 0.05;
  uint64_t sp_seed = 0;
  sample_cmd->add_option("--population", sp_population, "population size N");
  sample_cmd->add_option("--oracle", sp_oracle, "oracle ledger providing strata");
  sample_cmd->add_option("--confidence", sp_confidence, "confidence level")
      ->capture_default_str();
  sample_cmd->add_option("--z", sp_z, "normal quantile override (e.g. 1.96)");
  sample_cmd->add_option("--p", sp_p, "assumed proportion")->capture_default_str();
  sample_cmd->add_option("--e", sp_e, "margin of error")->capture_default_str();
  sample_cmd->add_option("--seed", sp_seed, "sampling seed")->required();
  sample_cmd->add_option("--out", sp_out, "plan path");

  // compare
  auto* compare_cmd = app.add_subcommand("compare", "two-tool agreement, McNemar, odds ratio");
  std::string c_quadrants, c_oracle, c_runs, c_tool, c_out;
  double c_confidence = 0.95;
  int c_attempt = 1;
  compare_cmd->add_option("--quadrants", c_quadrants,
                          "both,a_only,b_only,neither counts (skips ledger inputs)");
  compare_cmd->add_option("--oracle", c_oracle, "oracle verdict ledger");
  compare_cmd->add_option("--runs", c_runs, "model run ledger");
  compare_cmd->add_option("--tool", c_tool, "two-column tool verdict file (id, has_error)");
  compare_cmd->add_option("--confidence", c_confidence, "CI level")->capture_default_str();
  compare_cmd->add_option("--attempt", c_attempt, "attempt index to score")
      ->capture_default_str();
  compare_cmd->add_option("--out", c_out, "report path");

  // mutate
  auto* mutate_cmd = app.add_subcommand("mutate", "inject single faults into a commit diff");
  std::string mu_diff, mu_outdir = ".", mu_base;
  int mu_count = 3, mu_jobs = 1;
  uint64_t mu_seed = 0;
  bool mu_verify = false;
  detail::CompilerOptions mu_copts;
  mutate_cmd->add_option("--diff", mu_diff, "origin unified diff")->required();
  mutate_cmd->add_option("--count", mu_count, "mutants to generate")->capture_default_str();
  mutate_cmd->add_option("--seed", mu_seed, "sampling seed")->required();
  mutate_cmd->add_option("--out-dir", mu_outdir, "output directory")->capture_default_str();
  mutate_cmd->add_flag("--verify", mu_verify, "compile pre/post images through the oracle");
  mutate_cmd->add_option("--base", mu_base, "base source file the diff applies to");
  mutate_cmd->add_option("--jobs", mu_jobs, "parallel compiles during verify")
      ->capture_default_str();
  mu_copts.attach(mutate_cmd);

  // extract / enumerate
  auto* extract_cmd = app.add_subcommand("extract", "feature macros of a C file");
  std::string e_file;
  bool e_json = false;
  extract_cmd->add_option("--file", e_file, "C source file")->required();
  extract_cmd->add_flag("--json", e_json, "JSON output");

  auto* enum_cmd = app.add_subcommand("enumerate", "products induced by a feature set");
  std::string en_file, en_macros;
  int en_cap = varmodel::kDefaultFeatureCap;
  enum_cmd->add_option("--file", en_file, "C source file");
  enum_cmd->add_option("--macros", en_macros, "comma-separated macro names");
  enum_cmd->add_option("--cap", en_cap, "enumeration cap")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*oracle_cmd) return cmd_oracle(o_dataset, o_out, o_copts, o_jobs);
    if (*detect_cmd)
      return cmd_detect(d_dataset, d_out, d_mopts,
                        d_kind == "diff" ? modelgw::PromptKind::Diff
                                         : modelgw::PromptKind::FullCode,
                        d_runs, d_jobs);
    if (*dd_cmd) return cmd_diff_detect(dd_diffs, dd_out, dd_mopts, dd_runs, dd_jobs);
    if (*fix_cmd) return cmd_fix_eval(f_runs, f_dataset, f_oracle, f_out, f_copts, f_jobs);
    if (*metrics_cmd) return cmd_metrics(m_runs, m_oracle, m_out, m_attempt);
    if (*stab_cmd) return cmd_stability(s_runs, s_oracle, s_out, s_k);
    if (*sample_cmd)
      return cmd_sample(sp_population, sp_oracle, sp_confidence, sp_z, sp_p, sp_e, sp_seed,
                        sp_out);
    if (*compare_cmd)
      return cmd_compare(c_quadrants, c_oracle, c_runs, c_tool, c_confidence, c_out, c_attempt);
    if (*mutate_cmd)
      return cmd_mutate(mu_diff, mu_count, mu_seed, mu_outdir, mu_base, mu_copts, mu_verify,
                        mu_jobs);
    if (*extract_cmd) return cmd_extract(e_file, e_json);
    if (*enum_cmd) return cmd_enumerate(en_file, en_macros, en_cap);
  } catch (const oracle::CompilerNotFound& e) {
    std::cerr << "environment error: " << e.what() << "\n";
    return kExitEnvironment;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace varcc::cli
