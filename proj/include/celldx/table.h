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

#ifndef CELLDX_TABLE_H_
#define CELLDX_TABLE_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace celldx {

// Rectangular table of raw string cells with a header row. Cells are kept
// verbatim so that untouched values survive a read/write cycle byte-for-byte.
class RawTable {
 public:
  RawTable() = default;
  RawTable(std::vector<std::string> header,
           std::vector<std::vector<std::string>> rows);

  std::size_t num_rows() const { return num_rows_; }
  std::size_t num_columns() const { return header_.size(); }
  const std::vector<std::string>& header() const { return header_; }

  const std::string& cell(std::size_t row, std::size_t col) const {
    return cells_[row * header_.size() + col];
  }
  void set_cell(std::size_t row, std::size_t col, std::string value) {
    cells_[row * header_.size() + col] = std::move(value);
  }
  std::span<const std::string> row(std::size_t r) const {
    return {cells_.data() + r * header_.size(), header_.size()};
  }
  std::vector<std::string> column(std::size_t col) const;

  // Index of a named column, if present.
  std::optional<std::size_t> find_column(std::string_view name) const;

  // Rows picked in the given order.
  RawTable select_rows(std::span<const std::size_t> indices) const;

  void append_row(std::span<const std::string> values);

  friend bool operator==(const RawTable&, const RawTable&) = default;

 private:
  std::vector<std::string> header_;
  std::vector<std::string> cells_;
  std::size_t num_rows_ = 0;
};

RawTable ParseCsv(std::string_view text);
std::string FormatCsv(const RawTable& table);

RawTable ReadCsv(const std::filesystem::path& path);
void WriteCsv(const RawTable& table, const std::filesystem::path& path);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view contents);

// Strict full-string parse; surrounding blanks allowed, nothing else.
std::optional<double> ParseReal(std::string_view text);
// Shortest representation that parses back to the same double.
std::string FormatReal(double value);

}  // namespace celldx

#endif  // CELLDX_TABLE_H_
