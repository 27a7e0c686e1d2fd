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

#ifndef CELLDX_EXPLAINER_H_
#define CELLDX_EXPLAINER_H_

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "celldx/encoding.h"
#include "celldx/models.h"

namespace celldx {

inline constexpr std::size_t kNeighborCount = 5;

// 1 - p(observed category); an all-zeros observed span (out-of-vocabulary
// value) scores exactly 1.
double CellConfidenceCategorical(const RowVector& logits, const RowVector& observed);
// Same, with the category probabilities already computed.
double CellConfidenceFromProbabilities(const RowVector& probabilities, const RowVector& observed);
// 1 - exp(-(x - x_hat)^2) on the standardized scale.
double CellConfidenceNumeric(double observed, double reconstructed);
double RowScore(std::span<const double> confidences);

enum class RankBy { kConfidence, kLoss };

struct ScoredBatch {
  Matrix reconstruction;  // raw model output in encoded space
  Matrix probabilities;   // categorical spans as distributions, numerics as reconstruction
  Matrix confidences;     // N x D cell scores
  Vector row_scores;      // sum of cell scores
  Vector row_losses;      // per-row reconstruction loss against the observed input
};

// Cell scores for any model kind. Networks and PCA yield confidences in
// [0, 1]; Marginals yields per-cell negative log-likelihoods. Network
// categorical spans use the normalized exponential of the logits; PCA spans
// are clipped at zero and renormalized.
ScoredBatch ScoreBatch(const TrainedModel& model, const Matrix& encoded);

// Indices of the k largest scores, descending; ties by ascending index.
std::vector<std::size_t> TopK(std::span<const double> scores, std::size_t k);

// Bottleneck activations of a reference dataset for neighbor lookup.
class LatentIndex {
 public:
  LatentIndex() = default;
  LatentIndex(const TrainedModel& model, const Matrix& encoded);

  const Matrix& latents() const { return latents_; }
  std::size_t size() const { return static_cast<std::size_t>(latents_.rows()); }
  // k nearest rows by Euclidean distance; `exclude` drops one row (self).
  std::vector<std::size_t> Nearest(const RowVector& query, std::size_t k,
                                   std::optional<std::size_t> exclude = std::nullopt) const;

 private:
  Matrix latents_;
};

// Linear 2-D map of the latent cloud onto its top-2 principal directions.
struct LatentMap {
  Matrix coordinates;     // N x 2
  RowVector mean;         // latent mean
  Eigen::MatrixXd basis;  // latent_width x 2 (zero column if width < 2)

  std::array<double, 2> Project(const RowVector& latent) const;
};

LatentMap BuildLatentMap(const Matrix& latents);
LatentMap BuildLatentMap(const TrainedModel& model, const Matrix& encoded);

struct CellExplanation {
  std::string attribute;
  std::string observed;
  std::string expected;
  double confidence = 0.0;
};

struct Explanation {
  std::size_t row = 0;
  std::vector<CellExplanation> cells;
  double row_score = 0.0;
  std::vector<std::string> expected_row;
  std::vector<std::size_t> neighbors;
  RowVector latent;
  std::optional<std::array<double, 2>> latent_xy;

  std::vector<double> confidences() const;
};

// Encodes `row`, reconstructs it, scores every cell and looks up the nearest
// reference rows in latent space. Network kinds only (kUnsupportedModelKind
// otherwise). `self` is excluded from the neighbor list.
Explanation Explain(const TrainedModel& model, std::span<const std::string> row,
                    const LatentIndex& index, std::size_t row_id,
                    std::optional<std::size_t> self = std::nullopt,
                    const LatentMap* map = nullptr);

nlohmann::json ExplanationToJson(const Explanation& e);

}  // namespace celldx

#endif  // CELLDX_EXPLAINER_H_
