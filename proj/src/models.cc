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

#include "celldx/models.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "celldx/error.h"

namespace celldx {

std::string_view ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kDae: return "dae";
    case ModelKind::kDaeEnhanced: return "dae_enhanced";
    case ModelKind::kAe: return "ae";
    case ModelKind::kPca: return "pca";
    case ModelKind::kMarginals: return "marginals";
  }
  return "unknown";
}

ModelKind ParseModelKind(std::string_view name) {
  for (ModelKind k : {ModelKind::kDae, ModelKind::kDaeEnhanced, ModelKind::kAe, ModelKind::kPca,
                      ModelKind::kMarginals}) {
    if (ModelKindName(k) == name) return k;
  }
  throw Error(ErrorCode::kParse, "unknown model kind '" + std::string(name) + "'");
}

void TrainConfig::Validate() const {
  if (batch_size == 0) throw Error(ErrorCode::kPrecondition, "batch_size must be >= 1");
  if (!(base_lr > 0.0)) throw Error(ErrorCode::kPrecondition, "base_lr must be positive");
  if (hidden.empty()) throw Error(ErrorCode::kInvalidArchitecture, "no hidden layers");
}

std::vector<std::size_t> SymmetricWidths(std::size_t encoded_width,
                                         const std::vector<std::size_t>& hidden) {
  std::vector<std::size_t> w{encoded_width};
  w.insert(w.end(), hidden.begin(), hidden.end());
  for (std::size_t i = hidden.size() - 1; i-- > 0;) w.push_back(hidden[i]);
  w.push_back(encoded_width);
  return w;
}

const LayerStack& TrainedModel::network() const {
  if (const auto* p = std::get_if<LayerStack>(&parameters)) return *p;
  throw Error(ErrorCode::kUnsupportedModelKind,
              std::string(ModelKindName(kind)) + " model has no network");
}

const PcaModel& TrainedModel::pca() const {
  if (const auto* p = std::get_if<PcaModel>(&parameters)) return *p;
  throw Error(ErrorCode::kUnsupportedModelKind, "not a PCA model");
}

const MarginalsModel& TrainedModel::marginals() const {
  if (const auto* p = std::get_if<MarginalsModel>(&parameters)) return *p;
  throw Error(ErrorCode::kUnsupportedModelKind, "not a marginals model");
}

namespace {

// Shared loop for the network kinds. With no corruption config the batch is
// fed unchanged, which is exactly plain autoencoder training.
TrainedModel TrainNetwork(const EncodedMatrix& train, const Schema& schema,
                          const std::optional<CorruptionConfig>& corruption, LossMode loss,
                          const TrainConfig& config, const EpochCallback& on_epoch) {
  config.Validate();
  if (corruption) corruption->Validate();
  if (train.layout != Layout::FromSchema(schema)) {
    throw Error(ErrorCode::kShapeMismatch, "encoded matrix layout does not match schema");
  }
  const auto widths = SymmetricWidths(train.width(), config.hidden);
  CheckArchitecture(widths, schema.encoded_width());

  TrainedModel model;
  model.kind = corruption ? (loss == LossMode::kEnhanced ? ModelKind::kDaeEnhanced : ModelKind::kDae)
                          : ModelKind::kAe;
  model.schema = schema;
  model.provenance.train = config;
  model.provenance.corruption = corruption;
  model.provenance.loss = loss;

  LayerStack stack = LayerStack::Init(widths, config.seed);
  AdamState adam = AdamState::For(stack);
  Rng shuffle_rng = MakeRng({config.seed, 0x73687566});
  Rng noise_rng = MakeRng({config.seed, corruption ? corruption->seed : 0, 0x6e6f6973});
  Rng alpha_rng = MakeRng({config.seed, 0x616c7068});

  const std::size_t n = train.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto width = static_cast<Eigen::Index>(train.width());

  for (std::size_t epoch = 0; epoch < config.max_epochs && n > 0; ++epoch) {
    const double lr = CosineLr(epoch, config.max_epochs, config.base_lr);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t b = std::min(config.batch_size, n - start);
      Matrix clean(static_cast<Eigen::Index>(b), width);
      for (std::size_t i = 0; i < b; ++i) {
        clean.row(static_cast<Eigen::Index>(i)) =
            train.values.row(static_cast<Eigen::Index>(order[start + i]));
      }
      Matrix input = clean;
      CorruptionMask mask(b, schema.size());
      if (corruption) mask = CorruptEncoded(input, schema, *corruption, noise_rng);

      ForwardResult fwd = Forward(stack, input);
      BatchLoss bl = loss == LossMode::kEnhanced
                         ? EnhancedBatchLoss(fwd.output, clean, train.layout, mask,
                                             SampleAlpha(alpha_rng))
                         : MixedBatchLoss(fwd.output, clean, train.layout);
      if (!std::isfinite(bl.value)) {
        throw Error(ErrorCode::kDivergence, "non-finite loss at epoch " + std::to_string(epoch) +
                                                ", batch " + std::to_string(batches) +
                                                ", lr " + std::to_string(lr));
      }
      AdamStep(stack, Backward(stack, fwd.cache, bl.output_grad), adam, lr);
      epoch_loss += bl.value;
      ++batches;
    }
    epoch_loss /= static_cast<double>(batches);
    model.provenance.epoch_losses.push_back(epoch_loss);
    model.provenance.epochs_run = epoch + 1;
    if (on_epoch) on_epoch(epoch, epoch_loss);
  }
  model.parameters = std::move(stack);
  return model;
}

}  // namespace

TrainedModel TrainDae(const EncodedMatrix& train, const Schema& schema,
                      const CorruptionConfig& corruption, LossMode loss,
                      const TrainConfig& config, const EpochCallback& on_epoch) {
  return TrainNetwork(train, schema, corruption, loss, config, on_epoch);
}

TrainedModel TrainAe(const EncodedMatrix& train, const Schema& schema, const TrainConfig& config,
                     const EpochCallback& on_epoch) {
  return TrainNetwork(train, schema, std::nullopt, LossMode::kPlain, config, on_epoch);
}

TrainedModel FitPcaModel(const EncodedMatrix& train, const Schema& schema, std::size_t q) {
  TrainedModel model;
  model.kind = ModelKind::kPca;
  model.schema = schema;
  model.parameters = q == 0 ? FitPcaByVariance(train.values, 0.9) : FitPca(train.values, q);
  return model;
}

TrainedModel FitMarginals(const RawTable& train, const Schema& schema, std::size_t k_max,
                          std::uint64_t seed) {
  CheckTableMatchesSchema(train, schema);
  if (!schema.is_fitted()) throw Error(ErrorCode::kPrecondition, "schema not fitted");
  MarginalsModel m;
  m.mixtures.resize(schema.size());
  m.frequencies.resize(schema.size());
  m.unseen_mass.assign(schema.size(), 0.0);
  const std::size_t n = train.num_rows();
  for (std::size_t d = 0; d < schema.size(); ++d) {
    const auto& spec = schema.attribute(d);
    if (spec.is_numeric()) {
      std::vector<double> x(n);
      for (std::size_t r = 0; r < n; ++r) {
        x[r] = (*ParseReal(train.cell(r, d)) - spec.mean) / spec.std_dev;
      }
      m.mixtures[d] = FitGmmBic(x, k_max, EmOptions{}, seed + d).model;
    } else {
      std::vector<double> counts(spec.categories.size(), 0.0);
      for (std::size_t r = 0; r < n; ++r) {
        if (const auto idx = spec.category_index(train.cell(r, d))) counts[*idx] += 1.0;
      }
      const double denom = static_cast<double>(n + spec.categories.size());
      for (double& c : counts) c = (c + 1.0) / denom;
      m.frequencies[d] = std::move(counts);
      m.unseen_mass[d] = 1.0 / denom;
    }
  }
  TrainedModel model;
  model.kind = ModelKind::kMarginals;
  model.schema = schema;
  model.parameters = std::move(m);
  return model;
}

Matrix ReconstructBatch(const TrainedModel& model, const Matrix& batch) {
  const Layout layout = Layout::FromSchema(model.schema);
  if (static_cast<std::size_t>(batch.cols()) != layout.width) {
    throw Error(ErrorCode::kShapeMismatch, "batch width does not match model schema");
  }
  switch (model.kind) {
    case ModelKind::kDae:
    case ModelKind::kDaeEnhanced:
    case ModelKind::kAe:
      return Reconstruct(model.network(), batch);
    case ModelKind::kPca:
      return PcaReconstruct(model.pca(), batch);
    case ModelKind::kMarginals: {
      const auto& m = model.marginals();
      RowVector expected(static_cast<Eigen::Index>(layout.width));
      for (std::size_t d = 0; d < layout.num_attributes(); ++d) {
        const Span s = layout.spans[d];
        const auto col = static_cast<Eigen::Index>(s.start);
        if (layout.categorical[d]) {
          for (std::size_t c = 0; c < s.width; ++c) {
            expected[col + static_cast<Eigen::Index>(c)] = m.frequencies[d][c];
          }
        } else {
          expected[col] = m.mixtures[d].Mean();
        }
      }
      return expected.replicate(batch.rows(), 1);
    }
  }
  throw Error(ErrorCode::kUnsupportedModelKind, "unknown model kind");
}

Matrix MarginalCellScores(const TrainedModel& model, const Matrix& batch) {
  const auto& m = model.marginals();
  const Layout layout = Layout::FromSchema(model.schema);
  if (static_cast<std::size_t>(batch.cols()) != layout.width) {
    throw Error(ErrorCode::kShapeMismatch, "batch width does not match model schema");
  }
  Matrix scores(batch.rows(), static_cast<Eigen::Index>(layout.num_attributes()));
  for (Eigen::Index r = 0; r < batch.rows(); ++r) {
    for (std::size_t d = 0; d < layout.num_attributes(); ++d) {
      const Span s = layout.spans[d];
      const auto col = static_cast<Eigen::Index>(s.start);
      double score = 0.0;
      if (layout.categorical[d]) {
        double p = m.unseen_mass[d];
        for (std::size_t c = 0; c < s.width; ++c) {
          if (batch(r, col + static_cast<Eigen::Index>(c)) == 1.0) p = m.frequencies[d][c];
        }
        score = -std::log(p);
      } else {
        score = -m.mixtures[d].LogDensity(batch(r, col));
      }
      scores(r, static_cast<Eigen::Index>(d)) = score;
    }
  }
  return scores;
}

std::vector<double> MarginalCellScores(const TrainedModel& model,
                                       std::span<const std::string> row) {
  const Matrix enc = EncodeRow(row, model.schema);
  const Matrix s = MarginalCellScores(model, enc);
  return {s.data(), s.data() + s.size()};
}

}  // namespace celldx
