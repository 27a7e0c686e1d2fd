/*
 * Copyright 2026 The celldx Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "celldx/table.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "celldx/error.h"

namespace celldx {

RawTable::RawTable(std::vector<std::string> header,
                   std::vector<std::vector<std::string>> rows)
    : header_(std::move(header)) {
  cells_.reserve(rows.size() * header_.size());
  for (auto& r : rows) append_row(r);
}

std::vector<std::string> RawTable::column(std::size_t col) const {
  std::vector<std::string> out;
  out.reserve(num_rows_);
  for (std::size_t r = 0; r < num_rows_; ++r) out.push_back(cell(r, col));
  return out;
}

std::optional<std::size_t> RawTable::find_column(std::string_view name) const {
  for (std::size_t c = 0; c < header_.size(); ++c) {
    if (header_[c] == name) return c;
  }
  return std::nullopt;
}

RawTable RawTable::select_rows(std::span<const std::size_t> indices) const {
  RawTable out;
  out.header_ = header_;
  out.cells_.reserve(indices.size() * header_.size());
  for (std::size_t r : indices) {
    if (r >= num_rows_) {
      throw Error(ErrorCode::kPrecondition, "row index out of range");
    }
    out.append_row(row(r));
  }
  return out;
}

void RawTable::append_row(std::span<const std::string> values) {
  if (values.size() != header_.size()) {
    throw Error(ErrorCode::kParse,
                "row " + std::to_string(num_rows_ + 1) + " has " +
                    std::to_string(values.size()) + " fields, expected " +
                    std::to_string(header_.size()));
  }
  cells_.insert(cells_.end(), values.begin(), values.end());
  ++num_rows_;
}

namespace {

// Splits RFC 4180 style CSV into records.
std::vector<std::vector<std::string>> SplitRecords(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t i = 0;
  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    // Blank lines are skipped.
    if (!(record.size() == 1 && record[0].empty() && !field_started)) {
      records.push_back(std::move(record));
    }
    record.clear();
    field_started = false;
  };
  if (text.starts_with("\xEF\xBB\xBF")) i = 3;
  for (; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(ch);
        field_started = true;
    }
  }
  if (in_quotes) throw Error(ErrorCode::kParse, "unterminated quoted field");
  if (field_started || !record.empty()) end_record();
  return records;
}

bool NeedsQuoting(std::string_view s) {
  return s.find_first_of(",\"\r\n") != std::string_view::npos;
}

void AppendField(std::string& out, std::string_view s) {
  if (!NeedsQuoting(s)) {
    out.append(s);
    return;
  }
  out.push_back('"');
  for (char ch : s) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
}

}  // namespace

RawTable ParseCsv(std::string_view text) {
  auto records = SplitRecords(text);
  if (records.empty()) throw Error(ErrorCode::kEmptyTable, "no header row");
  std::vector<std::string> header = std::move(records.front());
  RawTable table(std::move(header), {});
  for (std::size_t r = 1; r < records.size(); ++r) table.append_row(records[r]);
  return table;
}

std::string FormatCsv(const RawTable& table) {
  std::string out;
  auto write_row = [&out](std::span<const std::string> fields) {
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (c) out.push_back(',');
      AppendField(out, fields[c]);
    }
    out.push_back('\n');
  };
  write_row(table.header());
  for (std::size_t r = 0; r < table.num_rows(); ++r) write_row(table.row(r));
  return out;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

RawTable ReadCsv(const std::filesystem::path& path) {
  return ParseCsv(ReadFile(path));
}

void WriteCsv(const RawTable& table, const std::filesystem::path& path) {
  WriteFile(path, FormatCsv(table));
}

std::optional<double> ParseReal(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
    text.remove_prefix(1);
  }
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) {
    text.remove_suffix(1);
  }
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    return std::nullopt;
  }
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

std::string FormatReal(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw Error(ErrorCode::kParse, "cannot format real");
  return std::string(buf, ptr);
}

}  // namespace celldx
