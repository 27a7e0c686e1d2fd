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

#include "celldx/encoding.h"

#include "celldx/error.h"

namespace celldx {

Layout Layout::FromSchema(const Schema& schema) {
  Layout layout;
  for (const auto& a : schema.attributes()) {
    layout.spans.push_back({layout.width, a.encoded_width()});
    layout.categorical.push_back(a.is_categorical());
    layout.width += a.encoded_width();
  }
  return layout;
}

namespace {

void EncodeInto(std::span<const std::string> row, const Schema& schema,
                const Layout& layout, Eigen::Ref<RowVector> out) {
  for (std::size_t d = 0; d < schema.size(); ++d) {
    const auto& spec = schema.attribute(d);
    const Span span = layout.spans[d];
    if (spec.is_numeric()) {
      const auto value = ParseReal(row[d]);
      if (!value) {
        throw Error(ErrorCode::kSchemaMismatch,
                    "attribute '" + spec.name + "': '" + row[d] + "' is not numeric");
      }
      out[span.start] = (*value - spec.mean) / spec.std_dev;
    } else {
      out.segment(span.start, span.width).setZero();
      if (const auto idx = spec.category_index(row[d])) out[span.start + *idx] = 1.0;
    }
  }
}

void RequireFitted(const Schema& schema) {
  if (!schema.is_fitted()) {
    throw Error(ErrorCode::kPrecondition, "schema has unfitted numeric attributes");
  }
}

}  // namespace

EncodedMatrix Encode(const RawTable& table, const Schema& schema) {
  RequireFitted(schema);
  CheckTableMatchesSchema(table, schema);
  EncodedMatrix enc;
  enc.layout = Layout::FromSchema(schema);
  enc.values.resize(static_cast<Eigen::Index>(table.num_rows()),
                    static_cast<Eigen::Index>(enc.layout.width));
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    EncodeInto(table.row(r), schema, enc.layout, enc.values.row(static_cast<Eigen::Index>(r)));
  }
  return enc;
}

RowVector EncodeRow(std::span<const std::string> row, const Schema& schema) {
  RequireFitted(schema);
  if (row.size() != schema.size()) {
    throw Error(ErrorCode::kShapeMismatch, "row width does not match schema");
  }
  const Layout layout = Layout::FromSchema(schema);
  RowVector out(static_cast<Eigen::Index>(layout.width));
  EncodeInto(row, schema, layout, out);
  return out;
}

std::vector<std::string> DecodeRow(const RowVector& encoded, const Schema& schema) {
  const Layout layout = Layout::FromSchema(schema);
  if (static_cast<std::size_t>(encoded.size()) != layout.width) {
    throw Error(ErrorCode::kShapeMismatch, "encoded row width does not match schema");
  }
  std::vector<std::string> out;
  out.reserve(schema.size());
  for (std::size_t d = 0; d < schema.size(); ++d) {
    const auto& spec = schema.attribute(d);
    const Span span = layout.spans[d];
    if (spec.is_numeric()) {
      out.push_back(FormatReal(encoded[span.start] * spec.std_dev + spec.mean));
    } else {
      // argmax of softmax equals argmax of the logits; first index wins ties.
      Eigen::Index best = 0;
      encoded.segment(span.start, span.width).maxCoeff(&best);
      out.push_back(spec.categories[static_cast<std::size_t>(best)]);
    }
  }
  return out;
}

RowVector Softmax(const Eigen::Ref<const RowVector>& logits) {
  const double top = logits.maxCoeff();
  RowVector e = (logits.array() - top).exp().matrix();
  return e / e.sum();
}

}  // namespace celldx
