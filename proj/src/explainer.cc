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

#include "celldx/explainer.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "celldx/error.h"
#include "celldx/pca.h"

namespace celldx {

double CellConfidenceFromProbabilities(const RowVector& probabilities, const RowVector& observed) {
  if (probabilities.size() != observed.size()) {
    throw Error(ErrorCode::kShapeMismatch, "span widths differ");
  }
  for (Eigen::Index c = 0; c < observed.size(); ++c) {
    if (observed[c] == 1.0) return std::clamp(1.0 - probabilities[c], 0.0, 1.0);
  }
  return 1.0;
}

double CellConfidenceCategorical(const RowVector& logits, const RowVector& observed) {
  return CellConfidenceFromProbabilities(Softmax(logits), observed);
}

double CellConfidenceNumeric(double observed, double reconstructed) {
  const double r = observed - reconstructed;
  return -std::expm1(-r * r);
}

double RowScore(std::span<const double> confidences) {
  return std::accumulate(confidences.begin(), confidences.end(), 0.0);
}

namespace {

RowVector ClipNormalize(const RowVector& span) {
  RowVector p = span.cwiseMax(0.0);
  const double s = p.sum();
  if (s > 0.0) return p / s;
  return RowVector::Constant(span.size(), 1.0 / static_cast<double>(span.size()));
}

}  // namespace

ScoredBatch ScoreBatch(const TrainedModel& model, const Matrix& encoded) {
  const Layout layout = Layout::FromSchema(model.schema);
  ScoredBatch out;
  out.reconstruction = ReconstructBatch(model, encoded);
  out.probabilities = out.reconstruction;
  const auto n = encoded.rows();
  const auto d_count = static_cast<Eigen::Index>(layout.num_attributes());
  out.confidences.resize(n, d_count);

  const bool marginals = model.kind == ModelKind::kMarginals;
  if (marginals) out.confidences = MarginalCellScores(model, encoded);

  for (Eigen::Index r = 0; r < n; ++r) {
    for (std::size_t d = 0; d < layout.num_attributes(); ++d) {
      const Span s = layout.spans[d];
      const auto col = static_cast<Eigen::Index>(s.start);
      const auto w = static_cast<Eigen::Index>(s.width);
      if (layout.categorical[d]) {
        RowVector probs;
        if (model.is_network()) {
          probs = Softmax(out.reconstruction.row(r).segment(col, w));
        } else if (model.kind == ModelKind::kPca) {
          probs = ClipNormalize(out.reconstruction.row(r).segment(col, w));
        } else {
          probs = out.reconstruction.row(r).segment(col, w);
        }
        out.probabilities.row(r).segment(col, w) = probs;
        if (!marginals) {
          out.confidences(r, static_cast<Eigen::Index>(d)) =
              CellConfidenceFromProbabilities(probs, encoded.row(r).segment(col, w));
        }
      } else if (!marginals) {
        out.confidences(r, static_cast<Eigen::Index>(d)) =
            CellConfidenceNumeric(encoded(r, col), out.reconstruction(r, col));
      }
    }
  }
  out.row_scores = out.confidences.rowwise().sum();

  if (model.is_network()) {
    out.row_losses = AttributeLosses(out.reconstruction, encoded, layout).rowwise().sum();
  } else if (marginals) {
    out.row_losses = out.row_scores;
  } else {
    out.row_losses = (out.reconstruction - encoded).rowwise().squaredNorm();
  }
  return out;
}

std::vector<std::size_t> TopK(std::span<const double> scores, std::size_t k) {
  if (k > scores.size()) throw Error(ErrorCode::kPrecondition, "k exceeds number of rows");
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), better);
  idx.resize(k);
  return idx;
}

LatentIndex::LatentIndex(const TrainedModel& model, const Matrix& encoded)
    : latents_(Latent(model.network(), encoded)) {}

std::vector<std::size_t> LatentIndex::Nearest(const RowVector& query, std::size_t k,
                                              std::optional<std::size_t> exclude) const {
  if (query.size() != latents_.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "query width does not match latent index");
  }
  const Vector dist = (latents_.rowwise() - query).rowwise().squaredNorm();
  std::vector<std::size_t> idx;
  idx.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) {
    if (!exclude || *exclude != i) idx.push_back(i);
  }
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      const auto da = dist[static_cast<Eigen::Index>(a)];
                      const auto db = dist[static_cast<Eigen::Index>(b)];
                      return da != db ? da < db : a < b;
                    });
  idx.resize(k);
  return idx;
}

std::array<double, 2> LatentMap::Project(const RowVector& latent) const {
  const RowVector xy = (latent - mean) * basis;
  return {xy[0], xy[1]};
}

LatentMap BuildLatentMap(const Matrix& latents) {
  if (latents.rows() < 2) throw Error(ErrorCode::kPrecondition, "latent map needs >= 2 rows");
  const auto width = static_cast<std::size_t>(latents.cols());
  const PcaModel pca = FitPca(latents, std::min<std::size_t>(2, width), /*require_rank=*/false);
  LatentMap map;
  map.mean = pca.mean;
  map.basis = Eigen::MatrixXd::Zero(latents.cols(), 2);
  map.basis.leftCols(pca.basis.cols()) = pca.basis;
  map.coordinates = (latents.rowwise() - map.mean) * map.basis;
  return map;
}

LatentMap BuildLatentMap(const TrainedModel& model, const Matrix& encoded) {
  return BuildLatentMap(Latent(model.network(), encoded));
}

std::vector<double> Explanation::confidences() const {
  std::vector<double> out;
  out.reserve(cells.size());
  for (const auto& c : cells) out.push_back(c.confidence);
  return out;
}

Explanation Explain(const TrainedModel& model, std::span<const std::string> row,
                    const LatentIndex& index, std::size_t row_id,
                    std::optional<std::size_t> self, const LatentMap* map) {
  if (!model.is_network()) {
    throw Error(ErrorCode::kUnsupportedModelKind,
                std::string(ModelKindName(model.kind)) + " models have no latent space");
  }
  const Matrix encoded = EncodeRow(row, model.schema);
  const ScoredBatch scored = ScoreBatch(model, encoded);
  Explanation e;
  e.row = row_id;
  e.expected_row = DecodeRow(scored.reconstruction.row(0), model.schema);
  for (std::size_t d = 0; d < model.schema.size(); ++d) {
    e.cells.push_back({model.schema.attribute(d).name, row[d], e.expected_row[d],
                       scored.confidences(0, static_cast<Eigen::Index>(d))});
  }
  const auto conf = e.confidences();
  e.row_score = RowScore(conf);
  e.latent = Latent(model.network(), encoded).row(0);
  e.neighbors = index.Nearest(e.latent, kNeighborCount, self);
  if (map) e.latent_xy = map->Project(e.latent);
  return e;
}

nlohmann::json ExplanationToJson(const Explanation& e) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : e.cells) {
    cells.push_back({{"attribute", c.attribute},
                     {"observed", c.observed},
                     {"expected", c.expected},
                     {"confidence", c.confidence}});
  }
  nlohmann::json j{{"row", e.row},
                   {"cells", std::move(cells)},
                   {"row_score", e.row_score},
                   {"neighbors", e.neighbors}};
  j["latent_xy"] = e.latent_xy ? nlohmann::json{(*e.latent_xy)[0], (*e.latent_xy)[1]}
                               : nlohmann::json(nullptr);
  return j;
}

}  // namespace celldx
