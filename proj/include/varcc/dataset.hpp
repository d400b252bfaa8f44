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

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "varcc/util.hpp"

namespace varcc::dataset {

enum class ClaimedLabel { Compiles, Errors, Unknown };

inline const char* to_string(ClaimedLabel l) {
  switch (l) {
    case ClaimedLabel::Compiles: return "compiles";
    case ClaimedLabel::Errors: return "errors";
    case ClaimedLabel::Unknown: return "unknown";
  }
  return "unknown";
}

inline ClaimedLabel label_from_string(std::string_view s) {
  std::string l = to_lower(trim(s));
  if (l == "compiles" || l == "compile" || l == "ok") return ClaimedLabel::Compiles;
  if (l == "errors" || l == "error" || l == "fails") return ClaimedLabel::Errors;
  return ClaimedLabel::Unknown;
}

struct DatasetRow {
  std::string id;
  std::string code;
  ClaimedLabel label = ClaimedLabel::Unknown;
};

struct DatasetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// RFC 4180 style records: quoted fields may carry commas, newlines, and
// doubled quotes. Returns rows of raw fields.
inline std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  size_t i = 0;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
  };
  while (i < text.size()) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          i += 2;
        } else {
          quoted = false;
          ++i;
        }
      } else {
        field += c;
        ++i;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started && field.empty()) {
          quoted = true;
        } else {
          field += c;
        }
        field_started = true;
        ++i;
        break;
      case ',':
        end_field();
        ++i;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        [[fallthrough]];
      case '\n':
        end_row();
        ++i;
        break;
      default:
        field += c;
        field_started = true;
        ++i;
    }
  }
  if (quoted) throw DatasetError("unterminated quoted field");
  if (field_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

inline std::string csv_quote(std::string_view field) {
  bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// Dataset files carry a header row: id,code,label.
inline std::vector<DatasetRow> parse_dataset(std::string_view text) {
  auto rows = parse_csv(text);
  std::vector<DatasetRow> out;
  if (rows.empty()) return out;
  size_t start = 0;
  if (!rows[0].empty() && to_lower(trim(rows[0][0])) == "id") start = 1;
  std::set<std::string> ids;
  for (size_t r = start; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() == 1 && trim_view(row[0]).empty()) continue;
    if (row.size() < 2)
      throw DatasetError("row " + std::to_string(r + 1) + ": expected id,code[,label]");
    DatasetRow d;
    d.id = trim(row[0]);
    d.code = row[1];
    d.label = row.size() >= 3 ? label_from_string(row[2]) : ClaimedLabel::Unknown;
    if (d.id.empty()) throw DatasetError("row " + std::to_string(r + 1) + ": empty id");
    if (!ids.insert(d.id).second)
      throw DatasetError("duplicate system id '" + d.id + "'");
    out.push_back(std::move(d));
  }
  return out;
}

inline std::string render_dataset(const std::vector<DatasetRow>& rows) {
  std::string out = "id,code,label\n";
  for (const auto& r : rows) {
    out += csv_quote(r.id);
    out += ',';
    out += csv_quote(r.code);
    out += ',';
    out += to_string(r.label);
    out += '\n';
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DatasetError("cannot write file: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

inline std::vector<DatasetRow> load_dataset(const std::string& path) {
  return parse_dataset(read_file(path));
}

}  // namespace varcc::dataset
