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

#ifndef CELLDX_TESTS_TEST_UTIL_H_
#define CELLDX_TESTS_TEST_UTIL_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "celldx/encoding.h"
#include "celldx/schema.h"
#include "celldx/table.h"

namespace celldx::testing {

// Two categoricals of widths 2 and 3 plus one numeric: encoded width 6.
inline Schema SmallSchema() {
  AttributeSpec a{"color", AttributeKind::kCategorical, {"red", "blue"}, 0.0, 0.0};
  AttributeSpec b{"shape", AttributeKind::kCategorical, {"dot", "box", "star"}, 0.0, 0.0};
  AttributeSpec c{"size", AttributeKind::kNumeric, {}, 10.0, 2.0};
  return Schema({a, b, c});
}

inline RawTable SmallTable(std::size_t rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coin(0, 1), die(0, 2);
  std::normal_distribution<double> size(10.0, 2.0);
  const char* colors[] = {"red", "blue"};
  const char* shapes[] = {"dot", "box", "star"};
  std::vector<std::vector<std::string>> cells;
  for (std::size_t r = 0; r < rows; ++r) {
    cells.push_back({colors[coin(rng)], shapes[die(rng)], FormatReal(size(rng))});
  }
  return RawTable({"color", "shape", "size"}, std::move(cells));
}

inline Matrix RandomMatrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

// One-hot targets for the small schema with a random standardized numeric.
inline Matrix SmallTargets(Eigen::Index rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coin(0, 1), die(0, 2);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix t = Matrix::Zero(rows, 6);
  for (Eigen::Index r = 0; r < rows; ++r) {
    t(r, coin(rng)) = 1.0;
    t(r, 2 + die(rng)) = 1.0;
    t(r, 5) = n(rng);
  }
  return t;
}

}  // namespace celldx::testing

#endif  // CELLDX_TESTS_TEST_UTIL_H_
