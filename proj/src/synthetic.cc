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

#include "celldx/synthetic.h"

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "celldx/corruptor.h"
#include "celldx/error.h"

namespace celldx {

namespace {

constexpr std::array<const char*, 12> kWords = {"red",   "green", "blue",  "amber",
                                                 "olive", "ivory", "coral", "slate",
                                                 "mauve", "khaki", "azure", "umber"};

std::string CategoryName(std::size_t attr, std::size_t c) {
  std::string name = c < kWords.size() ? kWords[c] : "v" + std::to_string(c);
  return name + std::to_string(attr);
}

}  // namespace

RawTable GenerateSynthetic(const SyntheticSpec& spec) {
  if (spec.rows < 2 || spec.latent_dim == 0 || spec.categorical + spec.numeric == 0) {
    throw Error(ErrorCode::kPrecondition, "degenerate synthetic spec");
  }
  Rng rng = MakeRng({spec.seed, 0x73796e});
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const std::size_t k = spec.latent_dim;
  // Numeric loadings, offsets and units.
  std::vector<std::vector<double>> load(spec.numeric, std::vector<double>(k));
  std::vector<double> offset(spec.numeric), unit_scale(spec.numeric);
  for (std::size_t j = 0; j < spec.numeric; ++j) {
    for (auto& w : load[j]) w = normal(rng);
    offset[j] = 10.0 * normal(rng);
    unit_scale[j] = std::pow(10.0, std::floor(3.0 * unit(rng)));
  }
  // Category score weights.
  std::vector<std::vector<std::vector<double>>> cat_w(
      spec.categorical,
      std::vector<std::vector<double>>(spec.categories, std::vector<double>(k)));
  for (auto& attr : cat_w) {
    for (auto& cw : attr) {
      for (auto& w : cw) w = 2.0 * normal(rng);
    }
  }

  std::vector<std::string> header;
  for (std::size_t c = 0; c < spec.categorical; ++c) header.push_back("cat" + std::to_string(c));
  for (std::size_t j = 0; j < spec.numeric; ++j) header.push_back("num" + std::to_string(j));
  RawTable table(header, {});

  std::vector<double> z(k);
  std::vector<std::string> row(header.size());
  for (std::size_t r = 0; r < spec.rows; ++r) {
    for (auto& v : z) v = normal(rng);
    for (std::size_t c = 0; c < spec.categorical; ++c) {
      std::size_t best = 0;
      double best_score = -INFINITY;
      for (std::size_t v = 0; v < spec.categories; ++v) {
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i) s += cat_w[c][v][i] * z[i];
        const double u = std::max(unit(rng), 1e-300);
        s += spec.category_noise * -std::log(-std::log(u));
        if (s > best_score) {
          best_score = s;
          best = v;
        }
      }
      row[c] = CategoryName(c, best);
    }
    for (std::size_t j = 0; j < spec.numeric; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < k; ++i) s += load[j][i] * z[i];
      s += spec.numeric_noise * normal(rng);
      // Round to 4 significant decimals at the column's unit.
      const double value = std::round((offset[j] + s) * unit_scale[j] * 1e4) / 1e4;
      row[spec.categorical + j] = FormatReal(value);
    }
    table.append_row(row);
  }
  return table;
}

}  // namespace celldx
