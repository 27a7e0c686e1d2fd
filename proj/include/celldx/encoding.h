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

#ifndef CELLDX_ENCODING_H_
#define CELLDX_ENCODING_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "celldx/schema.h"
#include "celldx/table.h"

namespace celldx {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;
using Vector = Eigen::VectorXd;

// Columns [start, start + width) of the encoded matrix owned by an attribute.
struct Span {
  std::size_t start = 0;
  std::size_t width = 0;
  friend bool operator==(const Span&, const Span&) = default;
};

struct Layout {
  std::vector<Span> spans;
  std::vector<bool> categorical;
  std::size_t width = 0;

  static Layout FromSchema(const Schema& schema);
  std::size_t num_attributes() const { return spans.size(); }
  friend bool operator==(const Layout&, const Layout&) = default;
};

// Row-major standardized + one-hot representation of a table.
struct EncodedMatrix {
  Matrix values;
  Layout layout;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t width() const { return layout.width; }
};

// Numeric cells become (x - mean) / std_dev. Categorical cells become a
// one-hot span; values outside the vocabulary become an all-zeros span.
EncodedMatrix Encode(const RawTable& table, const Schema& schema);
RowVector EncodeRow(std::span<const std::string> row, const Schema& schema);

// Inverse mapping. Categorical spans are read as logits and decoded to the
// most probable category; numerics are de-standardized.
std::vector<std::string> DecodeRow(const RowVector& encoded, const Schema& schema);

// Numerically stable normalized exponential over a span of logits.
RowVector Softmax(const Eigen::Ref<const RowVector>& logits);

}  // namespace celldx

#endif  // CELLDX_ENCODING_H_
