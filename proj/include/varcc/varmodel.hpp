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

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "varcc/util.hpp"

namespace varcc::varmodel {

inline constexpr int kDefaultFeatureCap = 8;
inline constexpr int kMaxFeatureCap = 16;

// A C translation unit under analysis plus its size statistic.
struct SourceUnit {
  std::string id;
  std::string code;
  int loc = 0;  // lines with at least one non-whitespace character

  static SourceUnit from_code(std::string id, std::string code) {
    if (code.empty()) throw std::invalid_argument("SourceUnit: empty code for '" + id + "'");
    int loc = 0;
    for (const auto& line : split_lines(code))
      if (!trim_view(line).empty()) ++loc;
    return SourceUnit{std::move(id), std::move(code), loc};
  }
};

struct FeatureMacro {
  std::string name;

  friend auto operator<=>(const FeatureMacro&, const FeatureMacro&) = default;
};

enum class DirectiveKind { If, Ifdef, Ifndef, Elif, Else, Endif };

inline const char* to_string(DirectiveKind k) {
  switch (k) {
    case DirectiveKind::If: return "if";
    case DirectiveKind::Ifdef: return "ifdef";
    case DirectiveKind::Ifndef: return "ifndef";
    case DirectiveKind::Elif: return "elif";
    case DirectiveKind::Else: return "else";
    case DirectiveKind::Endif: return "endif";
  }
  return "?";
}

struct ScanError : std::runtime_error {
  int line;
  ScanError(const std::string& what, int line)
      : std::runtime_error(what + " at line " + std::to_string(line)), line(line) {}
};

struct UnbalancedConditional : ScanError {
  using ScanError::ScanError;
};

struct MalformedDirective : ScanError {
  using ScanError::ScanError;
};

struct DirectiveScan {
  struct Conditional {
    int line;  // 1-based, first physical line of the (possibly continued) directive
    DirectiveKind kind;
    std::vector<std::string> tested;  // macro names appearing in the condition
  };
  std::vector<Conditional> conditionals;
  std::vector<std::string> defines;      // #define targets, in order, duplicates kept
  std::set<std::string> value_context;   // tested outside a defined(...) atom
  std::set<std::string> non_boolean;     // tested inside an arithmetic comparison

  std::set<std::string> tested_macros() const {
    std::set<std::string> out;
    for (const auto& c : conditionals) out.insert(c.tested.begin(), c.tested.end());
    return out;
  }
};

namespace detail {

// Physical lines joined over backslash continuations, remembering where each
// logical line started.
struct LogicalLine {
  std::string text;
  int first_line;
};

inline std::vector<LogicalLine> join_continuations(std::string_view code) {
  std::vector<LogicalLine> out;
  auto physical = split_lines(code);
  for (size_t i = 0; i < physical.size(); ++i) {
    LogicalLine ll{physical[i], static_cast<int>(i + 1)};
    while (ends_with(ll.text, "\\") && i + 1 < physical.size()) {
      ll.text.pop_back();
      ll.text += physical[++i];
    }
    out.push_back(std::move(ll));
  }
  return out;
}

// Strips comments from one logical line given the current block-comment state;
// updates the state for following lines. String literals are honored.
inline std::string strip_comments(std::string_view line, bool& in_block) {
  std::string out;
  out.reserve(line.size());
  char quote = 0;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_block) {
      if (c == '*' && i + 1 < line.size() && line[i + 1] == '/') {
        in_block = false;
        ++i;
        out += ' ';
      }
      continue;
    }
    if (quote) {
      out += c;
      if (c == '\\' && i + 1 < line.size()) {
        out += line[++i];
      } else if (c == quote) {
        quote = 0;
      }
      continue;
    }
    if (c == '"' || c == '\'') {
      quote = c;
      out += c;
    } else if (c == '/' && i + 1 < line.size() && line[i + 1] == '/') {
      break;
    } else if (c == '/' && i + 1 < line.size() && line[i + 1] == '*') {
      in_block = true;
      ++i;
    } else {
      out += c;
    }
  }
  return out;
}

struct ConditionTokens {
  std::vector<std::string> macros;       // in first-appearance order
  std::set<std::string> value_context;   // identifiers used outside defined(...)
  std::set<std::string> non_boolean;     // identifiers adjacent to a comparison
};

// Pulls macro names out of an #if/#elif controlling expression. Identifiers
// inside defined(...) / defined M count as definedness tests; any other
// identifier is a value-context use (undefined macros evaluate as 0).
inline ConditionTokens scan_condition(std::string_view expr) {
  ConditionTokens out;
  std::set<std::string> seen;
  bool has_comparison = contains(expr, "<") || contains(expr, ">") ||
                        contains(expr, "==") || contains(expr, "!=");
  size_t i = 0;
  while (i < expr.size()) {
    if (!is_ident_start(expr[i])) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < expr.size() && is_ident_char(expr[j])) ++j;
    std::string word(expr.substr(i, j - i));
    i = j;
    if (word == "defined") {
      while (i < expr.size() && is_space(expr[i])) ++i;
      bool paren = i < expr.size() && expr[i] == '(';
      if (paren) ++i;
      while (i < expr.size() && is_space(expr[i])) ++i;
      size_t k = i;
      while (k < expr.size() && is_ident_char(expr[k])) ++k;
      if (k > i) {
        std::string name(expr.substr(i, k - i));
        if (seen.insert(name).second) out.macros.push_back(name);
        i = k;
      }
      if (paren) {
        while (i < expr.size() && is_space(expr[i])) ++i;
        if (i < expr.size() && expr[i] == ')') ++i;
      }
      continue;
    }
    // Plain identifier: a macro evaluated by value.
    if (seen.insert(word).second) out.macros.push_back(word);
    out.value_context.insert(word);
    if (has_comparison) out.non_boolean.insert(word);
  }
  return out;
}

}  // namespace detail

// Classifies every preprocessor directive line of a unit. Directives inside
// block comments are skipped; a directive spelled wrong (e.g. #els) raises
// MalformedDirective, an open/close mismatch raises UnbalancedConditional.
inline DirectiveScan scan_directives(std::string_view code) {
  static const std::set<std::string> kPassive = {"include", "undef",   "pragma", "error",
                                                 "warning", "line",    "include_next"};
  DirectiveScan scan;
  std::vector<int> open_lines;
  bool in_block = false;
  for (const auto& logical : detail::join_continuations(code)) {
    std::string text = detail::strip_comments(logical.text, in_block);
    std::string_view stripped = trim_view(text);
    if (stripped.empty() || stripped[0] != '#') continue;
    stripped.remove_prefix(1);
    stripped = trim_view(stripped);
    if (stripped.empty()) continue;  // null directive
    size_t wl = 0;
    while (wl < stripped.size() && is_ident_char(stripped[wl])) ++wl;
    std::string word(stripped.substr(0, wl));
    std::string rest = trim(stripped.substr(wl));
    int line = logical.first_line;

    auto push_conditional = [&](DirectiveKind kind, const std::string& cond_expr) {
      DirectiveScan::Conditional c{line, kind, {}};
      if (kind == DirectiveKind::Ifdef || kind == DirectiveKind::Ifndef) {
        size_t k = 0;
        while (k < cond_expr.size() && is_ident_char(cond_expr[k])) ++k;
        if (k > 0) c.tested.push_back(cond_expr.substr(0, k));
      } else if (kind == DirectiveKind::If || kind == DirectiveKind::Elif) {
        auto tokens = detail::scan_condition(cond_expr);
        c.tested = tokens.macros;
        scan.value_context.insert(tokens.value_context.begin(), tokens.value_context.end());
        scan.non_boolean.insert(tokens.non_boolean.begin(), tokens.non_boolean.end());
      }
      scan.conditionals.push_back(std::move(c));
    };

    if (word == "if" || word == "ifdef" || word == "ifndef") {
      open_lines.push_back(line);
      push_conditional(word == "if"      ? DirectiveKind::If
                       : word == "ifdef" ? DirectiveKind::Ifdef
                                         : DirectiveKind::Ifndef,
                       rest);
    } else if (word == "elif" || word == "else" || word == "endif") {
      if (open_lines.empty())
        throw UnbalancedConditional("#" + word + " without open conditional", line);
      push_conditional(word == "elif"   ? DirectiveKind::Elif
                       : word == "else" ? DirectiveKind::Else
                                        : DirectiveKind::Endif,
                       rest);
      if (word == "endif") open_lines.pop_back();
    } else if (word == "define") {
      size_t k = 0;
      while (k < rest.size() && is_ident_char(rest[k])) ++k;
      if (k > 0) scan.defines.push_back(rest.substr(0, k));
    } else if (!kPassive.count(word)) {
      throw MalformedDirective("unrecognized directive #" + word, line);
    }
  }
  if (!open_lines.empty())
    throw UnbalancedConditional("conditional opened here is never closed", open_lines.back());
  return scan;
}

// Feature macros of a scan: names tested in conditionals minus names that are
// #define targets anywhere in the unit, lexicographically sorted.
inline std::vector<FeatureMacro> extract_features(const DirectiveScan& scan) {
  std::set<std::string> tested = scan.tested_macros();
  for (const auto& d : scan.defines) tested.erase(d);
  std::vector<FeatureMacro> out;
  out.reserve(tested.size());
  for (const auto& name : tested) out.push_back(FeatureMacro{name});
  return out;
}

struct BadProductSyntax : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One total on/off assignment over a macro set. std::map keys keep the
// canonical lexicographic order by construction.
struct Product {
  std::map<std::string, bool> assignment;

  std::string canonical() const {
    std::string out;
    for (const auto& [name, on] : assignment) {
      if (!out.empty()) out += ',';
      out += name;
      out += on ? "=1" : "=0";
    }
    return out;
  }

  friend auto operator<=>(const Product&, const Product&) = default;
};

inline std::string format_product(const Product& p) { return p.canonical(); }

// Parses comma-separated NAME=0|1 pairs in any order with any spacing. The
// empty string denotes the empty product (no macros).
inline Product parse_product(std::string_view text) {
  Product p;
  if (trim_view(text).empty()) return p;
  for (const auto& piece : split(text, ',')) {
    std::string_view entry = trim_view(piece);
    size_t eq = entry.find('=');
    if (eq == std::string_view::npos)
      throw BadProductSyntax("missing '=' in product entry '" + std::string(entry) + "'");
    std::string name = trim(entry.substr(0, eq));
    std::string value = trim(entry.substr(eq + 1));
    if (!is_c_identifier(name))
      throw BadProductSyntax("bad macro identifier '" + name + "'");
    if (value != "0" && value != "1")
      throw BadProductSyntax("macro value must be 0 or 1, got '" + value + "'");
    if (p.assignment.count(name))
      throw BadProductSyntax("duplicate macro '" + name + "'");
    p.assignment[name] = value == "1";
  }
  return p;
}

struct TooManyFeatures : std::runtime_error {
  std::vector<std::string> macros;
  explicit TooManyFeatures(std::vector<std::string> names)
      : std::runtime_error("feature set exceeds enumeration cap: " +
                           [](const std::vector<std::string>& v) {
                             std::string s;
                             for (const auto& n : v) {
                               if (!s.empty()) s += ", ";
                               s += n;
                             }
                             return s;
                           }(names)),
        macros(std::move(names)) {}
};

// All 2^n products over the macro set, in lexicographic order of their
// canonical text. The empty set yields exactly the empty product.
inline std::vector<Product> enumerate_products(const std::vector<FeatureMacro>& macros,
                                               int cap = kDefaultFeatureCap) {
  if (cap > kMaxFeatureCap) cap = kMaxFeatureCap;
  if (static_cast<int>(macros.size()) > cap) {
    std::vector<std::string> names;
    for (const auto& m : macros) names.push_back(m.name);
    throw TooManyFeatures(std::move(names));
  }
  std::vector<std::string> sorted;
  for (const auto& m : macros) sorted.push_back(m.name);
  std::sort(sorted.begin(), sorted.end());
  size_t n = sorted.size();
  std::vector<Product> out;
  out.reserve(size_t{1} << n);
  for (size_t bits = 0; bits < (size_t{1} << n); ++bits) {
    Product p;
    for (size_t j = 0; j < n; ++j) {
      bool on = (bits >> (n - 1 - j)) & 1;  // first macro is the most significant bit
      p.assignment[sorted[j]] = on;
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace varcc::varmodel
