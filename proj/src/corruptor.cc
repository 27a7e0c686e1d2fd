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

#include "celldx/corruptor.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "celldx/error.h"

namespace celldx {

namespace {

constexpr int kTypoRetries = 100;
constexpr std::string_view kTypoAlphabet = "abcdefghijklmnopqrstuvwxyz";

// Log-normal shape on the unit scale before rescaling to the requested std.
constexpr double kLogNormalShape = 1.0;

template <typename T>
const T& PickUniform(const std::vector<T>& items, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, items.size() - 1);
  return items[pick(rng)];
}

char RandomChar(Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, kTypoAlphabet.size() - 1);
  return kTypoAlphabet[pick(rng)];
}

std::string RandomTypo(const std::string& value, Rng& rng) {
  std::vector<TypoOp> ops = {TypoOp::kInsert, TypoOp::kFlip};
  // Deleting the only character would produce an empty (missing) cell.
  if (value.size() >= 2) ops.push_back(TypoOp::kDelete);
  const TypoOp op = PickUniform(ops, rng);
  if (op == TypoOp::kInsert) {
    std::uniform_int_distribution<std::size_t> pos(0, value.size());
    const std::size_t p = pos(rng);
    return ApplyTypo(value, op, p, RandomChar(rng));
  }
  std::uniform_int_distribution<std::size_t> pos(0, value.size() - 1);
  const std::size_t p = pos(rng);
  if (op == TypoOp::kDelete) return ApplyTypo(value, op, p, '\0');
  char ch = RandomChar(rng);
  while (ch == value[p]) ch = RandomChar(rng);
  return ApplyTypo(value, op, p, ch);
}

CategoricalMode PickMode(const CorruptionConfig& cfg, std::size_t num_categories, Rng& rng) {
  if (num_categories >= 2) return PickUniform(cfg.categorical_modes, rng);
  // A single-category vocabulary admits no swap.
  return CategoricalMode::kTypoSynthesis;
}

}  // namespace

Rng MakeRng(std::initializer_list<std::uint64_t> words) {
  std::vector<std::uint32_t> seq;
  for (std::uint64_t w : words) {
    seq.push_back(static_cast<std::uint32_t>(w));
    seq.push_back(static_cast<std::uint32_t>(w >> 32));
  }
  std::seed_seq ss(seq.begin(), seq.end());
  return Rng(ss);
}

void CorruptionConfig::Validate() const {
  if (!(row_fraction >= 0.0 && row_fraction < 1.0)) {
    throw Error(ErrorCode::kPrecondition, "row_fraction must lie in [0, 1)");
  }
  if (!(gamma_low >= 1.0 && gamma_high >= gamma_low)) {
    throw Error(ErrorCode::kPrecondition, "gamma range must satisfy 1 <= low <= high");
  }
  if (noise_families.empty() || categorical_modes.empty()) {
    throw Error(ErrorCode::kPrecondition, "noise families and categorical modes must be non-empty");
  }
}

bool CorruptionMask::row_flagged(std::size_t r) const { return row_count(r) > 0; }

std::size_t CorruptionMask::row_count(std::size_t r) const {
  const auto begin = cells_.begin() + static_cast<std::ptrdiff_t>(r * attributes_);
  return static_cast<std::size_t>(
      std::count(begin, begin + static_cast<std::ptrdiff_t>(attributes_), 1));
}

std::size_t CorruptionMask::num_flagged_rows() const {
  std::size_t n = 0;
  for (std::size_t r = 0; r < rows_; ++r) n += row_flagged(r) ? 1 : 0;
  return n;
}

std::size_t CorruptionMask::num_flagged_cells() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), 1));
}

std::vector<bool> CorruptionMask::row_labels() const {
  std::vector<bool> labels(rows_);
  for (std::size_t r = 0; r < rows_; ++r) labels[r] = row_flagged(r);
  return labels;
}

std::vector<std::size_t> SelectRows(std::size_t n_rows, double fraction, Rng& rng) {
  const auto k = std::min<std::size_t>(
      n_rows, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n_rows))));
  std::vector<std::size_t> idx(n_rows);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n_rows - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<std::size_t> SelectCells(std::size_t d_total, Rng& rng) {
  if (d_total < 2) {
    throw Error(ErrorCode::kPrecondition, "need at least 2 attributes to corrupt");
  }
  std::uniform_int_distribution<std::size_t> count(1, d_total / 2);
  const std::size_t c = count(rng);
  std::vector<std::size_t> idx(d_total);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < c; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, d_total - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(c);
  std::sort(idx.begin(), idx.end());
  return idx;
}

double DrawNoise(NoiseFamily family, double scale, Rng& rng) {
  switch (family) {
    case NoiseFamily::kGaussian: {
      std::normal_distribution<double> n(0.0, scale);
      return n(rng);
    }
    case NoiseFamily::kLaplace: {
      // Laplace(0, b) has std b * sqrt(2); difference of exponentials.
      const double b = scale / std::sqrt(2.0);
      std::exponential_distribution<double> e(1.0);
      return b * (e(rng) - e(rng));
    }
    case NoiseFamily::kLogNormal: {
      const double s2 = kLogNormalShape * kLogNormalShape;
      const double mean = std::exp(s2 / 2.0);
      const double sd = std::sqrt((std::exp(s2) - 1.0) * std::exp(s2));
      std::lognormal_distribution<double> ln(0.0, kLogNormalShape);
      return scale * (ln(rng) - mean) / sd;
    }
  }
  return 0.0;
}

double CorruptNumeric(double x, double sigma_d, const CorruptionConfig& cfg, Rng& rng) {
  if (!(sigma_d > 0.0)) throw Error(ErrorCode::kPrecondition, "sigma_d must be positive");
  const NoiseFamily family = PickUniform(cfg.noise_families, rng);
  std::uniform_real_distribution<double> gamma(cfg.gamma_low, cfg.gamma_high);
  const double g = gamma(rng);
  double delta = DrawNoise(family, sigma_d * g, rng);
  // Continuous families hit exactly zero with probability 0; guard anyway so
  // a flagged cell always differs from its original.
  while (x + delta == x) delta = DrawNoise(family, sigma_d * g, rng);
  return x + delta;
}

std::string ApplyTypo(const std::string& value, TypoOp op, std::size_t position, char ch) {
  std::string out = value;
  switch (op) {
    case TypoOp::kInsert:
      out.insert(out.begin() + static_cast<std::ptrdiff_t>(position), ch);
      break;
    case TypoOp::kFlip:
      out[position] = ch;
      break;
    case TypoOp::kDelete:
      out.erase(position, 1);
      break;
  }
  return out;
}

std::string CorruptCategorical(const std::string& value,
                               const std::vector<std::string>& categories,
                               CategoricalMode mode, Rng& rng) {
  if (mode == CategoricalMode::kSwapCategory) {
    std::vector<std::string> others;
    for (const auto& c : categories) {
      if (c != value) others.push_back(c);
    }
    if (others.empty()) {
      throw Error(ErrorCode::kPrecondition, "category swap needs at least 2 categories");
    }
    return PickUniform(others, rng);
  }
  if (value.empty()) {
    throw Error(ErrorCode::kPrecondition, "typo synthesis needs a non-empty value");
  }
  for (int attempt = 0; attempt < kTypoRetries; ++attempt) {
    std::string candidate = RandomTypo(value, rng);
    if (std::find(categories.begin(), categories.end(), candidate) == categories.end()) {
      return candidate;
    }
  }
  throw Error(ErrorCode::kTypoExhausted, "no out-of-vocabulary edit of '" + value + "'");
}

CorruptedTable CorruptTable(const RawTable& table, const Schema& schema,
                            const CorruptionConfig& cfg) {
  cfg.Validate();
  CheckTableMatchesSchema(table, schema);
  if (!schema.is_fitted()) {
    throw Error(ErrorCode::kPrecondition, "corruption needs a fitted schema");
  }
  CorruptedTable out{table, CorruptionMask(table.num_rows(), schema.size()), {}};
  Rng row_rng = MakeRng({cfg.seed, 0});
  const auto rows = SelectRows(table.num_rows(), cfg.row_fraction, row_rng);
  for (std::size_t r : rows) {
    Rng rng = MakeRng({cfg.seed, 1, r});
    for (std::size_t d : SelectCells(schema.size(), rng)) {
      const auto& spec = schema.attribute(d);
      const std::string& original = table.cell(r, d);
      std::string corrupted;
      if (spec.is_numeric()) {
        const double x = *ParseReal(original);
        double y = CorruptNumeric(x, spec.std_dev, cfg, rng);
        corrupted = FormatReal(y);
        while (corrupted == original) {
          y = CorruptNumeric(x, spec.std_dev, cfg, rng);
          corrupted = FormatReal(y);
        }
      } else {
        const CategoricalMode mode = PickMode(cfg, spec.categories.size(), rng);
        corrupted = CorruptCategorical(original, spec.categories, mode, rng);
      }
      out.table.set_cell(r, d, std::move(corrupted));
      out.mask.set(r, d);
      out.originals.emplace(CellKey{r, d}, original);
    }
  }
  return out;
}

CorruptionMask CorruptEncoded(Matrix& batch, const Schema& schema,
                              const CorruptionConfig& cfg, Rng& rng) {
  const Layout layout = Layout::FromSchema(schema);
  const auto n = static_cast<std::size_t>(batch.rows());
  CorruptionMask mask(n, schema.size());
  for (std::size_t r : SelectRows(n, cfg.row_fraction, rng)) {
    const auto row = static_cast<Eigen::Index>(r);
    for (std::size_t d : SelectCells(schema.size(), rng)) {
      const auto& spec = schema.attribute(d);
      const Span span = layout.spans[d];
      const auto col = static_cast<Eigen::Index>(span.start);
      if (spec.is_numeric()) {
        // Standardized units: sigma_d is 1.
        batch(row, col) = CorruptNumeric(batch(row, col), 1.0, cfg, rng);
      } else {
        const auto w = static_cast<Eigen::Index>(span.width);
        Eigen::Index current = -1;
        for (Eigen::Index c = 0; c < w; ++c) {
          if (batch(row, col + c) == 1.0) current = c;
        }
        const CategoricalMode mode = PickMode(cfg, spec.categories.size(), rng);
        batch.row(row).segment(col, w).setZero();
        if (mode == CategoricalMode::kSwapCategory) {
          std::vector<Eigen::Index> others;
          for (Eigen::Index c = 0; c < w; ++c) {
            if (c != current) others.push_back(c);
          }
          batch(row, col + PickUniform(others, rng)) = 1.0;
        }
      }
      mask.set(r, d);
    }
  }
  return mask;
}

RawTable MaskToTable(const CorruptionMask& mask, const std::vector<std::string>& header) {
  if (header.size() != mask.attributes()) {
    throw Error(ErrorCode::kShapeMismatch, "mask header width mismatch");
  }
  RawTable t(header, {});
  std::vector<std::string> row(header.size());
  for (std::size_t r = 0; r < mask.rows(); ++r) {
    for (std::size_t d = 0; d < header.size(); ++d) row[d] = mask.at(r, d) ? "1" : "0";
    t.append_row(row);
  }
  return t;
}

CorruptionMask MaskFromTable(const RawTable& table) {
  CorruptionMask mask(table.num_rows(), table.num_columns());
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    for (std::size_t d = 0; d < table.num_columns(); ++d) {
      const std::string& v = table.cell(r, d);
      if (v == "1") {
        mask.set(r, d);
      } else if (v != "0") {
        throw Error(ErrorCode::kParse, "mask cell must be 0 or 1, got '" + v + "'");
      }
    }
  }
  return mask;
}

RawTable OriginalsToTable(const std::map<CellKey, std::string>& originals,
                          const std::vector<std::string>& header) {
  RawTable t({"row", "attribute", "value"}, {});
  for (const auto& [key, value] : originals) {
    t.append_row(std::vector<std::string>{std::to_string(key.first), header.at(key.second), value});
  }
  return t;
}

std::map<CellKey, std::string> OriginalsFromTable(const RawTable& table,
                                                  const std::vector<std::string>& header) {
  if (table.header() != std::vector<std::string>{"row", "attribute", "value"}) {
    throw Error(ErrorCode::kParse, "originals file must have header row,attribute,value");
  }
  std::map<CellKey, std::string> out;
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    const auto row = ParseReal(table.cell(r, 0));
    const auto it = std::find(header.begin(), header.end(), table.cell(r, 1));
    if (!row || *row < 0 || it == header.end()) {
      throw Error(ErrorCode::kParse, "bad originals record at line " + std::to_string(r + 2));
    }
    out.emplace(CellKey{static_cast<std::size_t>(*row),
                        static_cast<std::size_t>(it - header.begin())},
                table.cell(r, 2));
  }
  return out;
}

}  // namespace celldx
