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

#include <array>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "varcc/random.hpp"
#include "varcc/util.hpp"

namespace varcc::changeset {

struct DiffError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BadHunkHeader : DiffError {
  using DiffError::DiffError;
};

struct CountMismatch : DiffError {
  using DiffError::DiffError;
};

struct ApplyError : DiffError {
  using DiffError::DiffError;
};

struct HunkLine {
  char tag = ' ';  // ' ' context, '+' added, '-' removed, '\\' marker
  std::string text;
};

struct Hunk {
  long old_start = 0, old_count = 0;
  long new_start = 0, new_count = 0;
  std::string section;  // trailing context after the second @@
  std::vector<HunkLine> lines;

  std::string render_header() const {
    auto range = [](long start, long count) {
      std::string s = std::to_string(start);
      if (count != 1) s += "," + std::to_string(count);
      return s;
    };
    std::string out = "@@ -" + range(old_start, old_count) + " +" + range(new_start, new_count) +
                      " @@";
    if (!section.empty()) out += " " + section;
    return out;
  }
};

struct FileChange {
  std::string path;        // post-image path
  bool is_c_source = false;  // derived solely from the .c / .h extension
  std::vector<std::string> preamble;  // diff --git / index / --- / +++ lines, verbatim
  std::vector<Hunk> hunks;
};

struct UnifiedDiff {
  std::vector<FileChange> files;
};

namespace detail {

inline bool c_source_path(std::string_view path) {
  return ends_with(path, ".c") || ends_with(path, ".h");
}

inline std::string strip_diff_prefix(std::string_view path) {
  std::string_view p = trim_view(path);
  // Drop a trailing timestamp column emitted by plain `diff -u`.
  size_t tab = p.find('\t');
  if (tab != std::string_view::npos) p = p.substr(0, tab);
  if (starts_with(p, "a/") || starts_with(p, "b/")) p.remove_prefix(2);
  return std::string(p);
}

inline std::optional<std::pair<long, long>> parse_range(std::string_view text) {
  long start = 0, count = 1;
  size_t i = 0;
  if (i >= text.size() || !isdigit(static_cast<unsigned char>(text[i]))) return std::nullopt;
  while (i < text.size() && isdigit(static_cast<unsigned char>(text[i])))
    start = start * 10 + (text[i++] - '0');
  if (i < text.size() && text[i] == ',') {
    ++i;
    if (i >= text.size() || !isdigit(static_cast<unsigned char>(text[i]))) return std::nullopt;
    count = 0;
    while (i < text.size() && isdigit(static_cast<unsigned char>(text[i])))
      count = count * 10 + (text[i++] - '0');
  }
  if (i != text.size()) return std::nullopt;
  return std::make_pair(start, count);
}

}  // namespace detail

// Structural parse of a unified diff. Non-C files are retained but flagged;
// header line counts are checked against hunk bodies.
inline UnifiedDiff parse_diff(std::string_view text) {
  UnifiedDiff diff;
  if (trim_view(text).empty()) return diff;
  auto lines = split_lines(text);

  FileChange* file = nullptr;
  Hunk* hunk = nullptr;
  std::vector<std::string> pending_preamble;

  auto finish_hunk = [&](size_t lineno) {
    if (!hunk) return;
    long olds = 0, news = 0;
    for (const auto& l : hunk->lines) {
      if (l.tag == ' ') {
        ++olds;
        ++news;
      } else if (l.tag == '-') {
        ++olds;
      } else if (l.tag == '+') {
        ++news;
      }
    }
    if (olds != hunk->old_count || news != hunk->new_count)
      throw CountMismatch("hunk before line " + std::to_string(lineno) + " declares -" +
                          std::to_string(hunk->old_count) + "/+" +
                          std::to_string(hunk->new_count) + " but carries -" +
                          std::to_string(olds) + "/+" + std::to_string(news));
    hunk = nullptr;
  };

  for (size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (starts_with(line, "@@")) {
      finish_hunk(i);
      size_t close = line.find("@@", 2);
      if (close == std::string::npos)
        throw BadHunkHeader("unterminated hunk header at line " + std::to_string(i + 1));
      std::string middle = trim(line.substr(2, close - 2));
      auto parts = split(middle, ' ');
      if (parts.size() != 2 || parts[0].empty() || parts[1].empty() || parts[0][0] != '-' ||
          parts[1][0] != '+')
        throw BadHunkHeader("bad hunk ranges at line " + std::to_string(i + 1));
      auto old_range = detail::parse_range(std::string_view(parts[0]).substr(1));
      auto new_range = detail::parse_range(std::string_view(parts[1]).substr(1));
      if (!old_range || !new_range)
        throw BadHunkHeader("bad hunk ranges at line " + std::to_string(i + 1));
      if (!file) {
        // Hunks without file headers: a bare single-file diff.
        diff.files.emplace_back();
        file = &diff.files.back();
        file->preamble = std::move(pending_preamble);
        pending_preamble.clear();
      }
      Hunk h;
      h.old_start = old_range->first;
      h.old_count = old_range->second;
      h.new_start = new_range->first;
      h.new_count = new_range->second;
      h.section = trim(line.substr(close + 2));
      file->hunks.push_back(std::move(h));
      hunk = &file->hunks.back();
      continue;
    }
    if (hunk && !line.empty() && (line[0] == ' ' || line[0] == '+' || line[0] == '-' ||
                                  line[0] == '\\')) {
      hunk->lines.push_back(HunkLine{line[0], line.substr(1)});
      continue;
    }
    if (hunk && line.empty()) {
      // Tolerate a stripped trailing-space context line.
      hunk->lines.push_back(HunkLine{' ', ""});
      continue;
    }
    finish_hunk(i);
    if (starts_with(line, "--- ")) {
      pending_preamble.push_back(line);
      continue;
    }
    if (starts_with(line, "+++ ")) {
      diff.files.emplace_back();
      file = &diff.files.back();
      file->path = detail::strip_diff_prefix(std::string_view(line).substr(4));
      file->is_c_source = detail::c_source_path(file->path);
      file->preamble = std::move(pending_preamble);
      pending_preamble.clear();
      file->preamble.push_back(line);
      continue;
    }
    pending_preamble.push_back(line);
  }
  finish_hunk(lines.size());
  return diff;
}

inline std::string render_diff(const UnifiedDiff& diff) {
  std::string out;
  for (const auto& file : diff.files) {
    for (const auto& p : file.preamble) {
      out += p;
      out += '\n';
    }
    for (const auto& h : file.hunks) {
      out += h.render_header();
      out += '\n';
      for (const auto& l : h.lines) {
        out += l.tag;
        out += l.text;
        out += '\n';
      }
    }
  }
  return out;
}

// Applies one file's hunks to its base text, verifying context and removed
// lines against the base.
inline std::string apply_change(const FileChange& change, std::string_view base) {
  auto base_lines = split_lines(base);
  std::vector<std::string> out;
  size_t cursor = 0;  // index into base_lines
  for (const auto& hunk : change.hunks) {
    size_t target = hunk.old_count == 0 ? static_cast<size_t>(hunk.old_start)
                                        : static_cast<size_t>(hunk.old_start - 1);
    if (target < cursor || target > base_lines.size())
      throw ApplyError("hunk @@ -" + std::to_string(hunk.old_start) + " out of order or range");
    while (cursor < target) out.push_back(base_lines[cursor++]);
    for (const auto& l : hunk.lines) {
      switch (l.tag) {
        case ' ':
          if (cursor >= base_lines.size() || base_lines[cursor] != l.text)
            throw ApplyError("context mismatch at base line " + std::to_string(cursor + 1));
          out.push_back(base_lines[cursor++]);
          break;
        case '-':
          if (cursor >= base_lines.size() || base_lines[cursor] != l.text)
            throw ApplyError("removed-line mismatch at base line " + std::to_string(cursor + 1));
          ++cursor;
          break;
        case '+':
          out.push_back(l.text);
          break;
        default:
          break;  // "\ No newline" marker
      }
    }
  }
  while (cursor < base_lines.size()) out.push_back(base_lines[cursor++]);
  std::string joined = join(out, "\n");
  joined += '\n';
  return joined;
}

enum class MutationOp {
  KeywordSwap,
  ElifSpelling,
  DropSemicolon,
  DropComma,
  DropBrace,
  DropParen,
  BadPreprocDirective,
  DuplicateStructField,
  UndeclaredIdentifier,
  UnterminatedString,
  InvalidOperator,
  MemberAccessStar,
  DropAssignOp,
  BadLiteral,
};

inline constexpr std::array<MutationOp, 14> kAllMutationOps = {
    MutationOp::KeywordSwap,        MutationOp::ElifSpelling,
    MutationOp::DropSemicolon,      MutationOp::DropComma,
    MutationOp::DropBrace,          MutationOp::DropParen,
    MutationOp::BadPreprocDirective, MutationOp::DuplicateStructField,
    MutationOp::UndeclaredIdentifier, MutationOp::UnterminatedString,
    MutationOp::InvalidOperator,    MutationOp::MemberAccessStar,
    MutationOp::DropAssignOp,       MutationOp::BadLiteral,
};

inline const char* to_string(MutationOp op) {
  switch (op) {
    case MutationOp::KeywordSwap: return "keyword-swap";
    case MutationOp::ElifSpelling: return "elif-spelling";
    case MutationOp::DropSemicolon: return "drop-semicolon";
    case MutationOp::DropComma: return "drop-comma";
    case MutationOp::DropBrace: return "drop-brace";
    case MutationOp::DropParen: return "drop-paren";
    case MutationOp::BadPreprocDirective: return "bad-preproc-directive";
    case MutationOp::DuplicateStructField: return "duplicate-struct-field";
    case MutationOp::UndeclaredIdentifier: return "undeclared-identifier";
    case MutationOp::UnterminatedString: return "unterminated-string";
    case MutationOp::InvalidOperator: return "invalid-operator";
    case MutationOp::MemberAccessStar: return "member-access-star";
    case MutationOp::DropAssignOp: return "drop-assign-op";
    case MutationOp::BadLiteral: return "bad-literal";
  }
  return "?";
}

inline std::optional<MutationOp> mutation_op_from_string(std::string_view name) {
  for (MutationOp op : kAllMutationOps)
    if (name == to_string(op)) return op;
  return std::nullopt;
}

struct Site {
  size_t file = 0, hunk = 0, line = 0;  // line indexes into hunk.lines

  friend auto operator<=>(const Site&, const Site&) = default;
};

struct InapplicableSite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotEnoughSites : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

static const std::set<std::string, std::less<>> kCKeywords = {
    "auto",     "break",  "case",     "char",   "const",    "continue", "default",
    "do",       "double", "else",     "enum",   "extern",   "float",    "for",
    "goto",     "if",     "inline",   "int",    "long",     "register", "restrict",
    "return",   "short",  "signed",   "sizeof", "static",   "struct",   "switch",
    "typedef",  "union",  "unsigned", "void",   "volatile", "while",    "defined",
    "main",     "NULL"};

inline bool is_directive_line(std::string_view line) {
  auto t = trim_view(line);
  return !t.empty() && t[0] == '#';
}

// Position of `needle` in `line` outside string/char literals, or npos.
inline size_t find_unquoted(std::string_view line, std::string_view needle, size_t from = 0) {
  auto mask = quoted_mask(line);
  size_t pos = line.find(needle, from);
  while (pos != std::string_view::npos) {
    if (!mask[pos]) return pos;
    pos = line.find(needle, pos + 1);
  }
  return std::string_view::npos;
}

inline size_t rfind_unquoted_char(std::string_view line, std::string_view chars) {
  auto mask = quoted_mask(line);
  for (size_t i = line.size(); i-- > 0;) {
    if (!mask[i] && chars.find(line[i]) != std::string_view::npos) return i;
  }
  return std::string_view::npos;
}

struct Token {
  std::string text;
  size_t pos;
};

inline std::vector<Token> identifiers(std::string_view line) {
  std::vector<Token> out;
  auto mask = quoted_mask(line);
  size_t i = 0;
  while (i < line.size()) {
    if (mask[i] || !is_ident_start(line[i])) {
      ++i;
      continue;
    }
    if (i > 0 && is_ident_char(line[i - 1])) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < line.size() && is_ident_char(line[j])) ++j;
    out.push_back(Token{std::string(line.substr(i, j - i)), i});
    i = j;
  }
  return out;
}

// Identifier occurrences in use position: right of the first '=', inside a
// call's argument parentheses, or after `return`. Declared names and callees
// stay untouched so the rename is guaranteed to dangle.
inline std::vector<Token> use_position_identifiers(std::string_view line) {
  std::vector<Token> out;
  if (is_directive_line(line)) return out;
  size_t eq = find_unquoted(line, "=");
  size_t ret = find_unquoted(line, "return");
  size_t open = find_unquoted(line, "(");
  for (const auto& tok : identifiers(line)) {
    if (kCKeywords.count(tok.text)) continue;
    if (tok.text.size() < 2) continue;
    bool is_callee = false;
    size_t after = tok.pos + tok.text.size();
    while (after < line.size() && is_space(line[after])) ++after;
    if (after < line.size() && line[after] == '(') is_callee = true;
    if (is_callee) continue;
    bool in_rhs = eq != std::string_view::npos && tok.pos > eq;
    bool in_return = ret != std::string_view::npos && tok.pos > ret + 6;
    bool in_args = open != std::string_view::npos && tok.pos > open;
    if (in_rhs || in_return || in_args) out.push_back(tok);
  }
  return out;
}

// Field-declaration shape: `type name;` possibly with qualifiers, pointers,
// or an array suffix.
inline bool looks_like_field_decl(std::string_view line) {
  std::string_view t = trim_view(line);
  if (t.empty() || t.back() != ';' || is_directive_line(t)) return false;
  t.remove_suffix(1);
  t = trim_view(t);
  if (t.find_first_of("=(){}\"") != std::string_view::npos) return false;
  if (ends_with(t, "]")) {
    size_t open = t.rfind('[');
    if (open == std::string_view::npos) return false;
    t = trim_view(t.substr(0, open));
  }
  auto toks = identifiers(t);
  if (toks.size() < 2) return false;
  const auto& name = toks.back();
  if (name.pos + name.text.size() != t.size()) return false;
  return !kCKeywords.count(name.text) || name.text == "int";
}

// True when the site line sits inside a struct/union body visible earlier in
// the same hunk (the nearest unmatched '{' belongs to a struct-ish line).
inline bool inside_struct_body(const Hunk& hunk, size_t line_index) {
  long depth = 0;
  std::optional<size_t> opener;
  for (size_t i = 0; i < line_index; ++i) {
    if (hunk.lines[i].tag == '-') continue;
    const std::string& text = hunk.lines[i].text;
    auto mask = quoted_mask(text);
    for (size_t c = 0; c < text.size(); ++c) {
      if (mask[c]) continue;
      if (text[c] == '{') {
        if (depth == 0) opener = i;
        ++depth;
      } else if (text[c] == '}') {
        if (--depth == 0) opener.reset();
        if (depth < 0) depth = 0;
      }
    }
  }
  if (depth <= 0 || !opener) return false;
  const std::string& open_line = hunk.lines[*opener].text;
  return contains(open_line, "struct") || contains(open_line, "union");
}

inline std::optional<std::string> first_directive_word(std::string_view line) {
  std::string_view t = trim_view(line);
  if (t.empty() || t[0] != '#') return std::nullopt;
  t.remove_prefix(1);
  t = trim_view(t);
  size_t j = 0;
  while (j < t.size() && is_ident_char(t[j])) ++j;
  if (j < 2) return std::nullopt;
  return std::string(t.substr(0, j));
}

}  // namespace detail

// Textual applicability test for one op on one added line. Mutations only
// ever target added (+) lines of C files: context belongs to the pre-image.
inline bool op_applies(const Hunk& hunk, size_t line_index, MutationOp op) {
  const std::string& line = hunk.lines[line_index].text;
  using namespace detail;
  switch (op) {
    case MutationOp::KeywordSwap: {
      if (is_directive_line(line)) return false;
      size_t pos = find_unquoted(line, "if");
      while (pos != std::string_view::npos) {
        bool word = (pos == 0 || !is_ident_char(line[pos - 1])) &&
                    (pos + 2 >= line.size() || !is_ident_char(line[pos + 2]));
        if (word) {
          size_t after = pos + 2;
          while (after < line.size() && is_space(line[after])) ++after;
          if (after < line.size() && line[after] == '(') return true;
        }
        pos = find_unquoted(line, "if", pos + 1);
      }
      return false;
    }
    case MutationOp::ElifSpelling:
      return !is_directive_line(line) && find_unquoted(line, "else if") != std::string_view::npos;
    case MutationOp::DropSemicolon: {
      auto t = trim_view(line);
      return !t.empty() && t.back() == ';';
    }
    case MutationOp::DropComma:
      return find_unquoted(line, ",") != std::string_view::npos;
    case MutationOp::DropBrace:
      return rfind_unquoted_char(line, "{}") != std::string_view::npos;
    case MutationOp::DropParen:
      return rfind_unquoted_char(line, "()") != std::string_view::npos;
    case MutationOp::BadPreprocDirective:
      return first_directive_word(line).has_value();
    case MutationOp::DuplicateStructField:
      return looks_like_field_decl(line) && inside_struct_body(hunk, line_index);
    case MutationOp::UndeclaredIdentifier:
      return !use_position_identifiers(line).empty();
    case MutationOp::UnterminatedString: {
      size_t first = line.find('"');
      return first != std::string::npos && line.find('"', first + 1) != std::string::npos;
    }
    case MutationOp::InvalidOperator:
      return find_unquoted(line, "+=") != std::string_view::npos ||
             find_unquoted(line, "-=") != std::string_view::npos ||
             find_unquoted(line, "*=") != std::string_view::npos;
    case MutationOp::MemberAccessStar: {
      auto mask = quoted_mask(line);
      for (size_t i = 1; i + 1 < line.size(); ++i) {
        if (line[i] != '.' || mask[i]) continue;
        if (is_ident_char(line[i - 1]) && !isdigit(static_cast<unsigned char>(line[i - 1])) &&
            is_ident_start(line[i + 1]))
          return true;
      }
      return false;
    }
    case MutationOp::DropAssignOp: {
      auto mask = quoted_mask(line);
      for (size_t i = 0; i < line.size(); ++i) {
        if (line[i] != '=' || mask[i]) continue;
        char prev = i > 0 ? line[i - 1] : ' ';
        char next = i + 1 < line.size() ? line[i + 1] : ' ';
        if (std::string_view("=<>!+-*/%&|^").find(prev) != std::string_view::npos) continue;
        if (next == '=') continue;
        return true;
      }
      return false;
    }
    case MutationOp::BadLiteral: {
      auto mask = quoted_mask(line);
      for (size_t i = 0; i < line.size(); ++i) {
        if (mask[i] || !isdigit(static_cast<unsigned char>(line[i]))) continue;
        if (i > 0 && (is_ident_char(line[i - 1]) || line[i - 1] == '.')) continue;
        size_t j = i;
        while (j < line.size() && isdigit(static_cast<unsigned char>(line[j]))) ++j;
        if (j < line.size() && (is_ident_char(line[j]) || line[j] == '.')) continue;
        return true;
      }
      return false;
    }
  }
  return false;
}

// Single-line rewrite for an applicable op. DuplicateStructField is the one
// op that adds a line instead of editing in place.
inline std::string rewrite_line(const Hunk& hunk, size_t line_index, MutationOp op) {
  std::string line = hunk.lines[line_index].text;
  using namespace detail;
  switch (op) {
    case MutationOp::KeywordSwap: {
      size_t pos = find_unquoted(line, "if");
      while (pos != std::string::npos) {
        bool word = (pos == 0 || !is_ident_char(line[pos - 1])) &&
                    (pos + 2 >= line.size() || !is_ident_char(line[pos + 2]));
        if (word) {
          size_t after = pos + 2;
          while (after < line.size() && is_space(line[after])) ++after;
          if (after < line.size() && line[after] == '(') {
            line.replace(pos, 2, "for");
            return line;
          }
        }
        pos = find_unquoted(line, "if", pos + 1);
      }
      break;
    }
    case MutationOp::ElifSpelling: {
      size_t pos = find_unquoted(line, "else if");
      if (pos != std::string::npos) {
        line.replace(pos, 7, "elif");
        return line;
      }
      break;
    }
    case MutationOp::DropSemicolon: {
      size_t pos = line.rfind(';');
      if (pos != std::string::npos) {
        line.erase(pos, 1);
        return line;
      }
      break;
    }
    case MutationOp::DropComma: {
      size_t pos = rfind_unquoted_char(line, ",");
      if (pos != std::string::npos) {
        line.erase(pos, 1);
        return line;
      }
      break;
    }
    case MutationOp::DropBrace: {
      size_t pos = rfind_unquoted_char(line, "{}");
      if (pos != std::string::npos) {
        line.erase(pos, 1);
        return line;
      }
      break;
    }
    case MutationOp::DropParen: {
      size_t pos = rfind_unquoted_char(line, "()");
      if (pos != std::string::npos) {
        line.erase(pos, 1);
        return line;
      }
      break;
    }
    case MutationOp::BadPreprocDirective: {
      if (auto word = first_directive_word(line)) {
        size_t pos = line.find(*word);
        line.erase(pos + word->size() - 1, 1);  // #else -> #els
        return line;
      }
      break;
    }
    case MutationOp::UndeclaredIdentifier: {
      auto uses = use_position_identifiers(line);
      if (!uses.empty()) {
        const auto& tok = uses.back();
        line.replace(tok.pos, tok.text.size(), tok.text + "_undef");
        return line;
      }
      break;
    }
    case MutationOp::UnterminatedString: {
      size_t pos = line.rfind('"');
      if (pos != std::string::npos) {
        line.erase(pos, 1);
        return line;
      }
      break;
    }
    case MutationOp::InvalidOperator: {
      for (std::string_view pat : {"+=", "-=", "*="}) {
        size_t pos = find_unquoted(line, pat);
        if (pos != std::string::npos) {
          line.insert(pos, 1, pat[0]);  // += -> ++=
          return line;
        }
      }
      break;
    }
    case MutationOp::MemberAccessStar: {
      auto mask = quoted_mask(line);
      for (size_t i = 1; i + 1 < line.size(); ++i) {
        if (line[i] != '.' || mask[i]) continue;
        if (is_ident_char(line[i - 1]) && !isdigit(static_cast<unsigned char>(line[i - 1])) &&
            is_ident_start(line[i + 1])) {
          line[i] = '*';
          return line;
        }
      }
      break;
    }
    case MutationOp::DropAssignOp: {
      auto mask = quoted_mask(line);
      for (size_t i = 0; i < line.size(); ++i) {
        if (line[i] != '=' || mask[i]) continue;
        char prev = i > 0 ? line[i - 1] : ' ';
        char next = i + 1 < line.size() ? line[i + 1] : ' ';
        if (std::string_view("=<>!+-*/%&|^").find(prev) != std::string_view::npos) continue;
        if (next == '=') continue;
        line.erase(i, 1);
        return line;
      }
      break;
    }
    case MutationOp::BadLiteral: {
      auto mask = quoted_mask(line);
      for (size_t i = 0; i < line.size(); ++i) {
        if (mask[i] || !isdigit(static_cast<unsigned char>(line[i]))) continue;
        if (i > 0 && (is_ident_char(line[i - 1]) || line[i - 1] == '.')) continue;
        size_t j = i;
        while (j < line.size() && isdigit(static_cast<unsigned char>(line[j]))) ++j;
        if (j < line.size() && (is_ident_char(line[j]) || line[j] == '.')) continue;
        line.insert(j, "q");  // 42 -> 42q, an invalid suffix
        return line;
      }
      break;
    }
    case MutationOp::DuplicateStructField:
      return line;  // handled by the caller as an insertion
  }
  throw InapplicableSite(std::string("op ") + to_string(op) + " does not apply here");
}

// All (added line) sites in C files where the op's textual precondition holds.
inline std::vector<Site> applicable_sites(const UnifiedDiff& diff, MutationOp op) {
  std::vector<Site> out;
  for (size_t f = 0; f < diff.files.size(); ++f) {
    if (!diff.files[f].is_c_source) continue;
    for (size_t h = 0; h < diff.files[f].hunks.size(); ++h) {
      const Hunk& hunk = diff.files[f].hunks[h];
      for (size_t l = 0; l < hunk.lines.size(); ++l) {
        if (hunk.lines[l].tag != '+') continue;
        if (op_applies(hunk, l, op)) out.push_back(Site{f, h, l});
      }
    }
  }
  return out;
}

struct Mutant {
  std::string origin_id;
  MutationOp op = MutationOp::KeywordSwap;
  Site site;
  UnifiedDiff mutated;
};

// Injects exactly one fault at the site. Hunk headers are adjusted when the
// op changes the line count (DuplicateStructField only).
inline Mutant mutate(const UnifiedDiff& diff, MutationOp op, const Site& site,
                     uint64_t /*seed*/ = 0, std::string origin_id = "") {
  if (site.file >= diff.files.size() || site.hunk >= diff.files[site.file].hunks.size() ||
      site.line >= diff.files[site.file].hunks[site.hunk].lines.size())
    throw InapplicableSite("site out of range");
  const Hunk& hunk = diff.files[site.file].hunks[site.hunk];
  if (hunk.lines[site.line].tag != '+' || !diff.files[site.file].is_c_source ||
      !op_applies(hunk, site.line, op))
    throw InapplicableSite(std::string("op ") + to_string(op) + " does not apply at site");

  Mutant mutant;
  mutant.origin_id = std::move(origin_id);
  mutant.op = op;
  mutant.site = site;
  mutant.mutated = diff;
  Hunk& target = mutant.mutated.files[site.file].hunks[site.hunk];
  if (op == MutationOp::DuplicateStructField) {
    HunkLine copy = target.lines[site.line];
    target.lines.insert(target.lines.begin() + static_cast<long>(site.line) + 1, copy);
    target.new_count += 1;
  } else {
    target.lines[site.line].text = rewrite_line(target, site.line, op);
  }
  return mutant;
}

// `count` mutants with distinct (op, site) pairs drawn uniformly from all
// applicable pairs; a pure function of (diff, count, seed).
inline std::vector<Mutant> generate_mutants(const UnifiedDiff& diff, int count, uint64_t seed,
                                            std::string origin_id = "") {
  std::vector<std::pair<MutationOp, Site>> pairs;
  for (MutationOp op : kAllMutationOps)
    for (const Site& site : applicable_sites(diff, op)) pairs.emplace_back(op, site);
  if (static_cast<int>(pairs.size()) < count)
    throw NotEnoughSites("need " + std::to_string(count) + " distinct (op, site) pairs, found " +
                         std::to_string(pairs.size()));
  auto picks = sample_without_replacement(pairs.size(), static_cast<size_t>(count), seed);
  std::vector<Mutant> out;
  for (size_t idx : picks)
    out.push_back(mutate(diff, pairs[idx].first, pairs[idx].second, seed, origin_id));
  return out;
}

}  // namespace varcc::changeset
