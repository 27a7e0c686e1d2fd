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

#include "celldx/schema.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include "celldx/error.h"

namespace celldx {

std::string_view AttributeKindName(AttributeKind kind) {
  return kind == AttributeKind::kCategorical ? "categorical" : "numeric";
}

std::optional<std::size_t> AttributeSpec::category_index(
    std::string_view value) const {
  const auto it = std::find(categories.begin(), categories.end(), value);
  if (it == categories.end()) return std::nullopt;
  return static_cast<std::size_t>(it - categories.begin());
}

Schema::Schema(std::vector<AttributeSpec> attributes)
    : attributes_(std::move(attributes)) {
  std::set<std::string, std::less<>> names;
  for (const auto& a : attributes_) {
    if (!names.insert(a.name).second) {
      throw Error(ErrorCode::kPrecondition, "duplicate attribute name '" + a.name + "'");
    }
    if (a.is_categorical()) {
      if (a.categories.empty()) {
        throw Error(ErrorCode::kPrecondition,
                    "categorical attribute '" + a.name + "' has no categories");
      }
      std::unordered_set<std::string> seen(a.categories.begin(), a.categories.end());
      if (seen.size() != a.categories.size()) {
        throw Error(ErrorCode::kPrecondition,
                    "categorical attribute '" + a.name + "' has duplicate categories");
      }
      ++num_categorical_;
    }
    encoded_width_ += a.encoded_width();
  }
}

bool Schema::is_fitted() const {
  return std::all_of(attributes_.begin(), attributes_.end(), [](const auto& a) {
    return a.is_categorical() || a.std_dev > 0.0;
  });
}

std::optional<std::size_t> Schema::find(std::string_view name) const {
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    if (attributes_[i].name == name) return i;
  }
  return std::nullopt;
}

Schema InferSchema(const RawTable& table, const KindOverrides& overrides) {
  if (table.num_rows() < 2 || table.num_columns() == 0) {
    throw Error(ErrorCode::kEmptyTable, "need at least 2 rows and 1 column");
  }
  std::vector<AttributeSpec> specs;
  specs.reserve(table.num_columns());
  for (std::size_t c = 0; c < table.num_columns(); ++c) {
    AttributeSpec spec;
    spec.name = table.header()[c];
    std::size_t parseable = 0;
    std::string first_bad;
    for (std::size_t r = 0; r < table.num_rows(); ++r) {
      if (ParseReal(table.cell(r, c))) {
        ++parseable;
      } else if (first_bad.empty()) {
        first_bad = table.cell(r, c);
      }
    }
    const auto hint = overrides.find(spec.name);
    if (hint != overrides.end()) {
      spec.kind = hint->second;
      if (spec.is_numeric() && parseable != table.num_rows()) {
        throw Error(ErrorCode::kMixedColumn,
                    "column '" + spec.name + "' forced numeric but contains '" +
                        first_bad + "'");
      }
    } else if (parseable == table.num_rows()) {
      spec.kind = AttributeKind::kNumeric;
    } else if (parseable == 0) {
      spec.kind = AttributeKind::kCategorical;
    } else {
      throw Error(ErrorCode::kMixedColumn,
                  "column '" + spec.name + "' mixes numbers with '" + first_bad +
                      "'; pass a kind override");
    }
    if (spec.is_categorical()) {
      std::unordered_set<std::string> seen;
      for (std::size_t r = 0; r < table.num_rows(); ++r) {
        const std::string& v = table.cell(r, c);
        if (seen.insert(v).second) spec.categories.push_back(v);
      }
    }
    specs.push_back(std::move(spec));
  }
  return Schema(std::move(specs));
}

Schema FitEncoder(const RawTable& table, const Schema& schema) {
  CheckTableMatchesSchema(table, schema);
  if (table.num_rows() == 0) throw Error(ErrorCode::kEmptyTable, "no rows to fit");
  std::vector<AttributeSpec> specs = schema.attributes();
  const double n = static_cast<double>(table.num_rows());
  for (std::size_t c = 0; c < specs.size(); ++c) {
    auto& spec = specs[c];
    if (!spec.is_numeric()) continue;
    double sum = 0.0;
    for (std::size_t r = 0; r < table.num_rows(); ++r) {
      sum += *ParseReal(table.cell(r, c));
    }
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t r = 0; r < table.num_rows(); ++r) {
      const double d = *ParseReal(table.cell(r, c)) - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / n);
    if (!(sd > 0.0) || sd <= 1e-12 * std::max(1.0, std::abs(mean))) {
      throw Error(ErrorCode::kConstantColumn, "column '" + spec.name + "' is constant");
    }
    spec.mean = mean;
    spec.std_dev = sd;
  }
  return Schema(std::move(specs));
}

void CheckTableMatchesSchema(const RawTable& table, const Schema& schema) {
  if (table.num_columns() != schema.size()) {
    throw Error(ErrorCode::kSchemaMismatch,
                "table has " + std::to_string(table.num_columns()) +
                    " columns, schema has " + std::to_string(schema.size()));
  }
  for (std::size_t c = 0; c < schema.size(); ++c) {
    const auto& spec = schema.attribute(c);
    if (table.header()[c] != spec.name) {
      throw Error(ErrorCode::kSchemaMismatch,
                  "attribute '" + spec.name + "' expected at column " +
                      std::to_string(c) + ", found '" + table.header()[c] + "'");
    }
    if (!spec.is_numeric()) continue;
    for (std::size_t r = 0; r < table.num_rows(); ++r) {
      if (!ParseReal(table.cell(r, c))) {
        throw Error(ErrorCode::kSchemaMismatch,
                    "attribute '" + spec.name + "' row " + std::to_string(r) +
                        ": '" + table.cell(r, c) + "' is not numeric");
      }
    }
  }
}

nlohmann::json SchemaToJson(const Schema& schema) {
  nlohmann::json attrs = nlohmann::json::array();
  for (const auto& a : schema.attributes()) {
    nlohmann::json j;
    j["name"] = a.name;
    j["kind"] = AttributeKindName(a.kind);
    if (a.is_categorical()) {
      j["categories"] = a.categories;
    } else {
      j["mean"] = a.mean;
      j["std_dev"] = a.std_dev;
    }
    attrs.push_back(std::move(j));
  }
  return nlohmann::json{{"attributes", std::move(attrs)}};
}

Schema SchemaFromJson(const nlohmann::json& doc) {
  try {
    std::vector<AttributeSpec> specs;
    for (const auto& j : doc.at("attributes")) {
      AttributeSpec a;
      a.name = j.at("name").get<std::string>();
      const auto kind = j.at("kind").get<std::string>();
      if (kind == "categorical") {
        a.kind = AttributeKind::kCategorical;
        a.categories = j.at("categories").get<std::vector<std::string>>();
      } else if (kind == "numeric") {
        a.kind = AttributeKind::kNumeric;
        a.mean = j.value("mean", 0.0);
        a.std_dev = j.value("std_dev", 0.0);
      } else {
        throw Error(ErrorCode::kParse, "unknown attribute kind '" + kind + "'");
      }
      specs.push_back(std::move(a));
    }
    return Schema(std::move(specs));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("schema document: ") + e.what());
  }
}

KindOverrides ParseKindOverrides(std::string_view text) {
  KindOverrides out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    std::string_view item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    if (item.empty()) continue;
    const auto colon = item.rfind(':');
    if (colon == std::string_view::npos) {
      throw Error(ErrorCode::kParse, "kind hint '" + std::string(item) + "' lacks ':'");
    }
    const std::string_view kind = item.substr(colon + 1);
    AttributeKind k;
    if (kind == "categorical" || kind == "cat") {
      k = AttributeKind::kCategorical;
    } else if (kind == "numeric" || kind == "num") {
      k = AttributeKind::kNumeric;
    } else {
      throw Error(ErrorCode::kParse, "unknown kind '" + std::string(kind) + "'");
    }
    out.emplace(std::string(item.substr(0, colon)), k);
  }
  return out;
}

}  // namespace celldx
