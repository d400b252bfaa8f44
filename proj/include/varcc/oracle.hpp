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

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "varcc/dataset.hpp"
#include "varcc/subprocess.hpp"
#include "varcc/util.hpp"
#include "varcc/varmodel.hpp"

namespace varcc::oracle {

struct CompilerSpec {
  std::string executable;
  std::string standard = "c99";
  std::vector<std::string> extra_flags;
  double timeout_seconds = 10.0;
};

struct CompilerNotFound : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CompileTimeout : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline bool executable_on_path(const std::string& name) {
  if (name.find('/') != std::string::npos)
    return ::access(name.c_str(), X_OK) == 0;
  const char* path = std::getenv("PATH");
  if (!path) return false;
  for (const auto& dir : split(path, ':')) {
    if (dir.empty()) continue;
    if (::access((dir + "/" + name).c_str(), X_OK) == 0) return true;
  }
  return false;
}

// Picks the requested compiler, or the first of clang/gcc/cc found on PATH.
inline CompilerSpec resolve_compiler(const std::string& requested = "",
                                     const std::string& standard = "c99") {
  CompilerSpec spec;
  spec.standard = standard;
  if (!requested.empty()) {
    if (!executable_on_path(requested))
      throw CompilerNotFound("compiler not found: " + requested);
    spec.executable = requested;
    return spec;
  }
  for (const char* cand : {"clang", "gcc", "cc"}) {
    if (executable_on_path(cand)) {
      spec.executable = cand;
      return spec;
    }
  }
  throw CompilerNotFound("no C compiler found on PATH (tried clang, gcc, cc)");
}

enum class ErrorCategory {
  Redefinition,
  TypeResolution,
  UndeclaredName,
  Syntax,
  ImplicitInt,
  Preprocessor,
  InitializerSemantics,
  Other,
};

inline const char* to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Redefinition: return "Redefinition";
    case ErrorCategory::TypeResolution: return "TypeResolution";
    case ErrorCategory::UndeclaredName: return "UndeclaredName";
    case ErrorCategory::Syntax: return "Syntax";
    case ErrorCategory::ImplicitInt: return "ImplicitInt";
    case ErrorCategory::Preprocessor: return "Preprocessor";
    case ErrorCategory::InitializerSemantics: return "InitializerSemantics";
    case ErrorCategory::Other: return "Other";
  }
  return "Other";
}

// Keyword-pattern classification targeting the clang family's wording; first
// match wins, Other is the total fallback.
inline ErrorCategory classify_error(std::string_view message) {
  auto has = [&](std::string_view pat) { return contains(message, pat); };
  if (has("redefinition") || has("redeclar")) return ErrorCategory::Redefinition;
  if (has("unknown type name") || has("conflicting types") || has("incomplete") ||
      has("never completed"))
    return ErrorCategory::TypeResolution;
  if (has("undeclared identifier")) return ErrorCategory::UndeclaredName;
  if (has("expected ")) return ErrorCategory::Syntax;
  if (has("type specifier missing")) return ErrorCategory::ImplicitInt;
  if (has("invalid preprocessing directive") || has("unterminated"))
    return ErrorCategory::Preprocessor;
  if (has("initializer element is not a compile-time constant"))
    return ErrorCategory::InitializerSemantics;
  return ErrorCategory::Other;
}

enum class Severity { Error, Warning, Note };

inline const char* to_string(Severity s) {
  switch (s) {
    case Severity::Error: return "error";
    case Severity::Warning: return "warning";
    case Severity::Note: return "note";
  }
  return "note";
}

struct Diagnostic {
  Severity severity = Severity::Note;
  std::string message;
  std::optional<int> line;
  ErrorCategory category = ErrorCategory::Other;
};

// Extracts file:line[:col]: severity: message records from a compiler's
// diagnostic stream; source echo and caret lines are skipped.
inline std::vector<Diagnostic> parse_diagnostics(std::string_view text) {
  std::vector<Diagnostic> out;
  for (const auto& line : split_lines(text)) {
    size_t pos = 0;
    std::optional<int> lineno;
    // Scan "path:NUM[:NUM]:" prefixes without committing to a path grammar.
    size_t colon = line.find(':');
    while (colon != std::string::npos) {
      size_t next = line.find(':', colon + 1);
      if (next == std::string::npos) break;
      std::string_view between = std::string_view(line).substr(colon + 1, next - colon - 1);
      if (!between.empty() &&
          std::all_of(between.begin(), between.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        if (!lineno) lineno = std::atoi(std::string(between).c_str());
        pos = next + 1;
        colon = next;
        continue;
      }
      break;
    }
    std::string_view rest = trim_view(std::string_view(line).substr(pos));
    Severity sev;
    if (starts_with(rest, "fatal error:")) {
      sev = Severity::Error;
      rest.remove_prefix(12);
    } else if (starts_with(rest, "error:")) {
      sev = Severity::Error;
      rest.remove_prefix(6);
    } else if (starts_with(rest, "warning:")) {
      sev = Severity::Warning;
      rest.remove_prefix(8);
    } else if (starts_with(rest, "note:")) {
      sev = Severity::Note;
      rest.remove_prefix(5);
    } else {
      continue;
    }
    Diagnostic d;
    d.severity = sev;
    d.message = trim(rest);
    d.line = lineno;
    d.category = classify_error(d.message);
    out.push_back(std::move(d));
  }
  return out;
}

struct ProductOutcome {
  varmodel::Product product;
  bool compiled = false;
  std::vector<Diagnostic> diagnostics;
  double duration_seconds = 0.0;
  std::string raw_output;       // verbatim diagnostic stream
  bool diagnostics_parsed = true;  // false when a failing run yielded no parseable records
};

struct SystemVerdict {
  std::string system_id;
  std::vector<varmodel::FeatureMacro> features;
  std::vector<ProductOutcome> outcomes;  // canonical product order
  bool has_error = false;
  std::vector<varmodel::Product> failing;

  const ProductOutcome* outcome_for(const varmodel::Product& p) const {
    for (const auto& o : outcomes)
      if (o.product == p) return &o;
    return nullptr;
  }
};

namespace detail {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "varcc.XXXXXX").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (!mkdtemp(buf.data())) throw std::runtime_error("mkdtemp failed");
    path = buf.data();
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

inline std::string write_source(const std::filesystem::path& dir, const std::string& code) {
  auto file = dir / "unit.c";
  std::ofstream out(file, std::ios::binary);
  out.write(code.data(), static_cast<std::streamsize>(code.size()));
  out.close();
  return file.string();
}

// Runs indices [0, n) on up to `jobs` worker threads. Exceptions surface on
// the caller thread; result ordering is the caller's responsibility.
template <typename Fn>
inline void parallel_for(size_t n, int jobs, Fn&& fn) {
  if (jobs < 1) jobs = 1;
  if (jobs == 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  int width = std::min<size_t>(static_cast<size_t>(jobs), n);
  for (int t = 0; t < width; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

inline ProductOutcome compile_product_file(const varmodel::SourceUnit& unit,
                                           const varmodel::Product& product,
                                           const CompilerSpec& spec, const std::string& file) {
  std::vector<std::string> argv{spec.executable, "-std=" + spec.standard, "-fsyntax-only",
                                "-x", "c"};
  for (const auto& flag : spec.extra_flags) argv.push_back(flag);
  for (const auto& [name, on] : product.assignment)
    if (on) argv.push_back("-D" + name + "=1");
  argv.push_back(file);

  ProcessResult proc = run_process(argv, spec.timeout_seconds);
  if (proc.exec_failed)
    throw CompilerNotFound("failed to execute compiler: " + spec.executable);
  if (proc.timed_out)
    throw CompileTimeout("compiler timed out after " + std::to_string(spec.timeout_seconds) +
                         "s on " + unit.id + " [" + product.canonical() + "]");

  ProductOutcome outcome;
  outcome.product = product;
  outcome.duration_seconds = proc.duration_seconds;
  outcome.raw_output = proc.err.empty() ? proc.out : proc.err;
  outcome.diagnostics = parse_diagnostics(outcome.raw_output);
  bool any_error = std::any_of(outcome.diagnostics.begin(), outcome.diagnostics.end(),
                               [](const Diagnostic& d) { return d.severity == Severity::Error; });
  outcome.compiled = proc.exit_code == 0 && !any_error;
  if (!outcome.compiled && !any_error) {
    // Nonzero exit with nothing parseable: keep the raw text as an Other
    // diagnostic so downstream reports never lose the evidence.
    outcome.diagnostics_parsed = outcome.raw_output.empty();
    Diagnostic d;
    d.severity = Severity::Error;
    d.message = trim(outcome.raw_output);
    d.category = ErrorCategory::Other;
    outcome.diagnostics.push_back(std::move(d));
  }
  return outcome;
}

// Compiles one product of a unit in syntax-plus-semantics check mode: no
// linking, no artifact output, one -DNAME=1 per enabled macro, nothing for
// disabled macros.
inline ProductOutcome compile_product(const varmodel::SourceUnit& unit,
                                      const varmodel::Product& product,
                                      const CompilerSpec& spec) {
  detail::TempDir dir;
  std::string file = detail::write_source(dir.path, unit.code);
  return compile_product_file(unit, product, spec, file);
}

// Ground truth for a unit: every enumerated product compiled once. Product
// compilations are independent and run on a bounded pool; outcomes are kept
// in canonical order so the verdict is scheduling-independent.
inline SystemVerdict judge_system(const varmodel::SourceUnit& unit, const CompilerSpec& spec,
                                  int jobs = 1, int cap = varmodel::kDefaultFeatureCap) {
  auto scan = varmodel::scan_directives(unit.code);
  auto features = varmodel::extract_features(scan);
  auto products = varmodel::enumerate_products(features, cap);

  detail::TempDir dir;
  std::string file = detail::write_source(dir.path, unit.code);

  SystemVerdict verdict;
  verdict.system_id = unit.id;
  verdict.features = features;
  verdict.outcomes.resize(products.size());
  detail::parallel_for(products.size(), jobs, [&](size_t i) {
    verdict.outcomes[i] = compile_product_file(unit, products[i], spec, file);
  });
  for (const auto& o : verdict.outcomes)
    if (!o.compiled) verdict.failing.push_back(o.product);
  verdict.has_error = !verdict.failing.empty();
  return verdict;
}

struct RelabelReport {
  struct Row {
    std::string id;
    dataset::ClaimedLabel claimed = dataset::ClaimedLabel::Unknown;
    bool actual_has_error = false;
    bool disagrees = false;
    std::string failure;  // nonempty when the row could not be judged
  };
  std::vector<Row> rows;
  long checked = 0;        // rows with a usable claimed label and a verdict
  long disagreements = 0;
  double rate = 0.0;
};

// Recomputes every claimed label with the oracle. A row failure is recorded
// and the batch continues.
inline RelabelReport validate_dataset_labels(const std::vector<dataset::DatasetRow>& rows,
                                             const CompilerSpec& spec, int jobs = 1) {
  RelabelReport report;
  report.rows.resize(rows.size());
  detail::parallel_for(rows.size(), jobs, [&](size_t i) {
    RelabelReport::Row out;
    out.id = rows[i].id;
    out.claimed = rows[i].label;
    try {
      auto unit = varmodel::SourceUnit::from_code(rows[i].id, rows[i].code);
      auto verdict = judge_system(unit, spec, 1);
      out.actual_has_error = verdict.has_error;
      if (rows[i].label != dataset::ClaimedLabel::Unknown) {
        bool claimed_error = rows[i].label == dataset::ClaimedLabel::Errors;
        out.disagrees = claimed_error != verdict.has_error;
      }
    } catch (const std::exception& e) {
      out.failure = e.what();
    }
    report.rows[i] = std::move(out);
  });
  for (const auto& r : report.rows) {
    if (!r.failure.empty() || r.claimed == dataset::ClaimedLabel::Unknown) continue;
    ++report.checked;
    if (r.disagrees) ++report.disagreements;
  }
  report.rate = report.checked ? static_cast<double>(report.disagreements) / report.checked : 0.0;
  return report;
}

}  // namespace varcc::oracle
