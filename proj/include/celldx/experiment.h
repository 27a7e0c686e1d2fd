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

#ifndef CELLDX_EXPERIMENT_H_
#define CELLDX_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "celldx/corruptor.h"
#include "celldx/metrics.h"
#include "celldx/models.h"
#include "celldx/schema.h"

namespace celldx {

// Detector line-up of the comparison table:
//   pca, marginals     fitted on the corrupted training split
//   ae_dirty           autoencoder trained on the corrupted training split
//   ae_clean           autoencoder trained on the clean training split
//   dae, dae_enhanced  denoising training on the clean split
inline const std::vector<std::string> kAllExperimentModels = {
    "pca", "marginals", "ae_dirty", "ae_clean", "dae", "dae_enhanced"};

struct ExperimentSpec {
  std::filesystem::path dataset;
  KindOverrides overrides;
  std::vector<std::string> models = kAllExperimentModels;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  std::optional<std::size_t> subsample_rows;
  double train_fraction = 0.7;
  std::uint64_t split_seed = 0;
  CorruptionConfig test_corruption;   // applied to the test split
  CorruptionConfig train_corruption;  // dirty training split for *_dirty / baselines
  CorruptionConfig dae_corruption;    // in-loop noise for DAE training
  TrainConfig train;
  std::size_t pca_components = 0;     // 0: 90% explained variance
  std::size_t gmm_max_components = 5;
  RankBy ranking = RankBy::kConfidence;
};

struct ExperimentSplit {
  RawTable train_clean;
  RawTable test_clean;
};

// Seeded optional subsample followed by a shuffled train/test split.
ExperimentSplit SplitDataset(const RawTable& data, const ExperimentSpec& spec);

struct ExperimentResult {
  std::vector<EvalReport> reports;  // one per (model, seed)
  std::vector<AggregateReport> aggregates;
};

using ProgressCallback = std::function<void(const std::string& message)>;

// Runs every (model, seed) cell. Corruption seeds are derived from the run
// seed so all models of one seed see the same corrupted test split.
ExperimentResult RunExperiment(const ExperimentSpec& spec, const RawTable& data,
                               const ProgressCallback& progress = {});
// Loads spec.dataset; throws kDatasetMissing if it does not exist.
ExperimentResult RunExperiment(const ExperimentSpec& spec, const ProgressCallback& progress = {});

}  // namespace celldx

#endif  // CELLDX_EXPERIMENT_H_
