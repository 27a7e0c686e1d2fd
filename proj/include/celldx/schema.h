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

#ifndef CELLDX_SCHEMA_H_
#define CELLDX_SCHEMA_H_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "celldx/table.h"

namespace celldx {

enum class AttributeKind { kCategorical, kNumeric };

std::string_view AttributeKindName(AttributeKind kind);

struct AttributeSpec {
  std::string name;
  AttributeKind kind = AttributeKind::kNumeric;
  // Categorical only; order defines the one-hot layout.
  std::vector<std::string> categories;
  // Numeric only; std_dev == 0 means "not fitted yet".
  double mean = 0.0;
  double std_dev = 0.0;

  bool is_categorical() const { return kind == AttributeKind::kCategorical; }
  bool is_numeric() const { return kind == AttributeKind::kNumeric; }
  std::optional<std::size_t> category_index(std::string_view value) const;
  // Number of encoded columns this attribute occupies.
  std::size_t encoded_width() const {
    return is_categorical() ? categories.size() : 1;
  }

  friend bool operator==(const AttributeSpec&, const AttributeSpec&) = default;
};

class Schema {
 public:
  Schema() = default;
  // Throws kPrecondition on duplicate names or malformed categorical specs.
  explicit Schema(std::vector<AttributeSpec> attributes);

  const std::vector<AttributeSpec>& attributes() const { return attributes_; }
  const AttributeSpec& attribute(std::size_t i) const { return attributes_[i]; }
  std::size_t size() const { return attributes_.size(); }
  std::size_t num_categorical() const { return num_categorical_; }
  std::size_t num_numeric() const { return attributes_.size() - num_categorical_; }
  std::size_t encoded_width() const { return encoded_width_; }
  bool is_fitted() const;
  std::optional<std::size_t> find(std::string_view name) const;

  friend bool operator==(const Schema&, const Schema&) = default;

 private:
  std::vector<AttributeSpec> attributes_;
  std::size_t num_categorical_ = 0;
  std::size_t encoded_width_ = 0;
};

using KindOverrides = std::map<std::string, AttributeKind, std::less<>>;

// Assigns a kind to every column. Fully parseable columns become numeric,
// fully unparseable ones categorical; partly parseable columns need an
// override. Categories are listed in first-occurrence order.
Schema InferSchema(const RawTable& table, const KindOverrides& overrides = {});

// Fits numeric mean and population standard deviation on `table`.
// Categorical specs pass through unchanged.
Schema FitEncoder(const RawTable& table, const Schema& schema);

// Header must name exactly the schema attributes in order; numeric cells must
// parse. Throws kSchemaMismatch naming the first offending attribute.
void CheckTableMatchesSchema(const RawTable& table, const Schema& schema);

nlohmann::json SchemaToJson(const Schema& schema);
Schema SchemaFromJson(const nlohmann::json& doc);

// Parses "name:categorical,other:numeric" style hint lists.
KindOverrides ParseKindOverrides(std::string_view text);

}  // namespace celldx

#endif  // CELLDX_SCHEMA_H_
