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

#ifndef CELLDX_MODELS_H_
#define CELLDX_MODELS_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "celldx/corruptor.h"
#include "celldx/encoding.h"
#include "celldx/gmm.h"
#include "celldx/nn.h"
#include "celldx/pca.h"
#include "celldx/schema.h"

namespace celldx {

enum class ModelKind { kDae, kDaeEnhanced, kAe, kPca, kMarginals };
enum class LossMode { kPlain, kEnhanced };

std::string_view ModelKindName(ModelKind kind);
ModelKind ParseModelKind(std::string_view name);

struct TrainConfig {
  std::size_t max_epochs = 5000;
  std::size_t batch_size = 128;
  double base_lr = 1e-3;
  std::uint64_t seed = 0;
  // Encoder hidden widths, input side first; the decoder mirrors them.
  std::vector<std::size_t> hidden = {128, 64};

  void Validate() const;
};

// [E, hidden..., reversed hidden without the bottleneck..., E].
std::vector<std::size_t> SymmetricWidths(std::size_t encoded_width,
                                         const std::vector<std::size_t>& hidden);

struct MarginalsModel {
  // Indexed by attribute; only the matching kind is populated.
  std::vector<GaussianMixture1D> mixtures;
  std::vector<std::vector<double>> frequencies;  // Laplace-smoothed
  std::vector<double> unseen_mass;               // 1 / (N + |categories|)
};

struct Provenance {
  TrainConfig train;
  std::optional<CorruptionConfig> corruption;  // in-loop noise, DAE kinds only
  LossMode loss = LossMode::kPlain;
  std::size_t epochs_run = 0;
  std::vector<double> epoch_losses;
  std::string regime;  // free-form note, e.g. "clean" or "dirty"
};

using ModelParameters = std::variant<LayerStack, PcaModel, MarginalsModel>;

struct TrainedModel {
  ModelKind kind = ModelKind::kDae;
  Schema schema;
  ModelParameters parameters;
  Provenance provenance;

  bool is_network() const { return std::holds_alternative<LayerStack>(parameters); }
  const LayerStack& network() const;
  const PcaModel& pca() const;
  const MarginalsModel& marginals() const;
};

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

// Denoising training: every mini-batch of clean rows is corrupted afresh
// in encoded space, the network sees the noisy batch and is scored against
// the clean one (plain mixed loss, or mask-weighted with alpha ~ Beta(0.5,
// 0.5) drawn once per batch). Throws kDivergence on a non-finite loss.
TrainedModel TrainDae(const EncodedMatrix& train, const Schema& schema,
                      const CorruptionConfig& corruption, LossMode loss,
                      const TrainConfig& config, const EpochCallback& on_epoch = {});

// Plain reconstruction training on the rows as given.
TrainedModel TrainAe(const EncodedMatrix& train, const Schema& schema, const TrainConfig& config,
                     const EpochCallback& on_epoch = {});

// q == 0 selects the smallest q reaching 90% explained variance.
TrainedModel FitPcaModel(const EncodedMatrix& train, const Schema& schema, std::size_t q = 0);

// Per-attribute density baseline: BIC-selected 1-D Gaussian mixtures over
// standardized numerics (1..k_max components), smoothed category frequencies.
TrainedModel FitMarginals(const RawTable& train, const Schema& schema, std::size_t k_max = 5,
                          std::uint64_t seed = 0);

// Model output in encoded space. Networks: decoder output (categorical spans
// are logits). PCA: project-and-lift. Marginals: mixture mean per numeric,
// frequency table per categorical span.
Matrix ReconstructBatch(const TrainedModel& model, const Matrix& batch);

// Negative log-likelihood per (row, attribute) under the marginal model.
Matrix MarginalCellScores(const TrainedModel& model, const Matrix& batch);
std::vector<double> MarginalCellScores(const TrainedModel& model,
                                       std::span<const std::string> row);

}  // namespace celldx

#endif  // CELLDX_MODELS_H_
