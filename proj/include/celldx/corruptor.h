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

#ifndef CELLDX_CORRUPTOR_H_
#define CELLDX_CORRUPTOR_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "celldx/encoding.h"
#include "celldx/schema.h"
#include "celldx/table.h"

namespace celldx {

using Rng = std::mt19937_64;

// Deterministic generator for an ordered tuple of seed words.
Rng MakeRng(std::initializer_list<std::uint64_t> words);

enum class NoiseFamily { kGaussian, kLaplace, kLogNormal };
enum class CategoricalMode { kSwapCategory, kTypoSynthesis };

struct CorruptionConfig {
  double row_fraction = 0.03;
  double gamma_low = 3.0;
  double gamma_high = 5.0;
  std::vector<NoiseFamily> noise_families = {
      NoiseFamily::kGaussian, NoiseFamily::kLaplace, NoiseFamily::kLogNormal};
  std::vector<CategoricalMode> categorical_modes = {
      CategoricalMode::kSwapCategory, CategoricalMode::kTypoSynthesis};
  std::uint64_t seed = 0;

  // Throws kPrecondition. A zero row fraction is accepted and means "clean".
  void Validate() const;
};

// Attribute-level ground truth: one flag per (row, attribute).
class CorruptionMask {
 public:
  CorruptionMask() = default;
  CorruptionMask(std::size_t rows, std::size_t attributes)
      : rows_(rows), attributes_(attributes), cells_(rows * attributes, 0) {}

  std::size_t rows() const { return rows_; }
  std::size_t attributes() const { return attributes_; }
  bool at(std::size_t r, std::size_t d) const { return cells_[r * attributes_ + d] != 0; }
  void set(std::size_t r, std::size_t d, bool v = true) {
    cells_[r * attributes_ + d] = v ? 1 : 0;
  }
  bool row_flagged(std::size_t r) const;
  std::size_t row_count(std::size_t r) const;
  std::size_t num_flagged_rows() const;
  std::size_t num_flagged_cells() const;
  std::vector<bool> row_labels() const;

  friend bool operator==(const CorruptionMask&, const CorruptionMask&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t attributes_ = 0;
  std::vector<std::uint8_t> cells_;
};

using CellKey = std::pair<std::size_t, std::size_t>;  // (row, attribute)

struct CorruptedTable {
  RawTable table;
  CorruptionMask mask;
  std::map<CellKey, std::string> originals;
};

// round(fraction * n_rows) distinct indices, uniformly without replacement,
// returned in ascending order.
std::vector<std::size_t> SelectRows(std::size_t n_rows, double fraction, Rng& rng);

// c ~ Unif{1..floor(d_total/2)} distinct attributes, ascending.
std::vector<std::size_t> SelectCells(std::size_t d_total, Rng& rng);

// Zero-mean additive noise with standard deviation `scale`.
double DrawNoise(NoiseFamily family, double scale, Rng& rng);

// x + delta with delta from a uniformly chosen family, std sigma_d * gamma,
// gamma ~ Unif(gamma_low, gamma_high).
double CorruptNumeric(double x, double sigma_d, const CorruptionConfig& cfg, Rng& rng);

enum class TypoOp { kInsert, kFlip, kDelete };

// Applies one edit. kFlip replaces the character at `position` with `ch`.
std::string ApplyTypo(const std::string& value, TypoOp op, std::size_t position, char ch);

// SwapCategory: uniform pick among the other categories.
// TypoSynthesis: random edits retried until the result is out of vocabulary;
// throws kTypoExhausted after 100 attempts.
std::string CorruptCategorical(const std::string& value,
                               const std::vector<std::string>& categories,
                               CategoricalMode mode, Rng& rng);

// Full protocol over a raw table. Row selection uses a stream derived from
// cfg.seed; each selected row uses its own (seed, row) substream.
CorruptedTable CorruptTable(const RawTable& table, const Schema& schema,
                            const CorruptionConfig& cfg);

// Same protocol applied in encoded space to rows of `batch` (used inside the
// training loop). Swaps move the one-hot bit; typos zero the span, which is
// what encoding an out-of-vocabulary value yields. Returns the mask.
CorruptionMask CorruptEncoded(Matrix& batch, const Schema& schema,
                              const CorruptionConfig& cfg, Rng& rng);

// Persistence: mask as 0/1 CSV with the data header; originals as
// (row, attribute, value) CSV.
RawTable MaskToTable(const CorruptionMask& mask, const std::vector<std::string>& header);
CorruptionMask MaskFromTable(const RawTable& table);
RawTable OriginalsToTable(const std::map<CellKey, std::string>& originals,
                          const std::vector<std::string>& header);
std::map<CellKey, std::string> OriginalsFromTable(const RawTable& table,
                                                  const std::vector<std::string>& header);

}  // namespace celldx

#endif  // CELLDX_CORRUPTOR_H_
