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

#include "celldx/experiment.h"

#include <algorithm>
#include <numeric>

#include "celldx/error.h"

namespace celldx {

ExperimentSplit SplitDataset(const RawTable& data, const ExperimentSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw Error(ErrorCode::kPrecondition, "train_fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> idx(data.num_rows());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng = MakeRng({spec.split_seed, 0x73706c6974});
  std::shuffle(idx.begin(), idx.end(), rng);
  if (spec.subsample_rows && *spec.subsample_rows < idx.size()) idx.resize(*spec.subsample_rows);
  const auto n_train = static_cast<std::size_t>(
      std::llround(spec.train_fraction * static_cast<double>(idx.size())));
  std::vector<std::size_t> train(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  // Keep file order inside each split.
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {data.select_rows(train), data.select_rows(test)};
}

namespace {

CorruptionConfig Reseeded(CorruptionConfig cfg, std::uint64_t run_seed, std::uint64_t salt) {
  Rng rng = MakeRng({cfg.seed, run_seed, salt});
  cfg.seed = rng();
  return cfg;
}

}  // namespace

ExperimentResult RunExperiment(const ExperimentSpec& spec, const RawTable& data,
                               const ProgressCallback& progress) {
  for (const auto& m : spec.models) {
    if (std::find(kAllExperimentModels.begin(), kAllExperimentModels.end(), m) ==
        kAllExperimentModels.end()) {
      throw Error(ErrorCode::kPrecondition, "unknown experiment model '" + m + "'");
    }
  }
  const ExperimentSplit split = SplitDataset(data, spec);
  const Schema inferred = InferSchema(split.train_clean, spec.overrides);
  KindOverrides kinds = spec.overrides;
  for (const auto& a : inferred.attributes()) kinds.emplace(a.name, a.kind);
  const Schema clean_schema = FitEncoder(split.train_clean, inferred);
  const EncodedMatrix clean_train = Encode(split.train_clean, clean_schema);

  auto wants = [&](std::string_view name) {
    return std::find(spec.models.begin(), spec.models.end(), name) != spec.models.end();
  };
  const bool needs_dirty = wants("pca") || wants("marginals") || wants("ae_dirty");

  ExperimentResult result;
  for (const std::uint64_t seed : spec.seeds) {
    const CorruptedTable test =
        CorruptTable(split.test_clean, clean_schema, Reseeded(spec.test_corruption, seed, 1));
    const GroundTruth truth{test.mask, test.originals};

    std::optional<Schema> dirty_schema;
    std::optional<RawTable> dirty_train;
    if (needs_dirty) {
      CorruptedTable dirty = CorruptTable(split.train_clean, clean_schema,
                                          Reseeded(spec.train_corruption, seed, 2));
      // No clean reference in this regime: vocabulary and statistics come
      // from the data as received.
      dirty_schema = FitEncoder(dirty.table, InferSchema(dirty.table, kinds));
      dirty_train = std::move(dirty.table);
    }

    TrainConfig train = spec.train;
    train.seed = seed;
    for (const auto& name : spec.models) {
      if (progress) progress("seed " + std::to_string(seed) + ": " + name);
      TrainedModel model;
      if (name == "dae" || name == "dae_enhanced") {
        model = TrainDae(clean_train, clean_schema, Reseeded(spec.dae_corruption, seed, 3),
                         name == "dae" ? LossMode::kPlain : LossMode::kEnhanced, train);
      } else if (name == "ae_clean") {
        model = TrainAe(clean_train, clean_schema, train);
      } else if (name == "ae_dirty") {
        model = TrainAe(Encode(*dirty_train, *dirty_schema), *dirty_schema, train);
      } else if (name == "pca") {
        model = FitPcaModel(Encode(*dirty_train, *dirty_schema), *dirty_schema, spec.pca_components);
      } else {
        model = FitMarginals(*dirty_train, *dirty_schema, spec.gmm_max_components, seed);
      }
      model.provenance.train.seed = seed;
      EvalReport rep = Evaluate(model, test.table, truth, spec.ranking);
      rep.model = name;
      rep.seed = seed;
      result.reports.push_back(std::move(rep));
    }
  }
  result.aggregates = Aggregate(result.reports);
  return result;
}

ExperimentResult RunExperiment(const ExperimentSpec& spec, const ProgressCallback& progress) {
  if (!std::filesystem::exists(spec.dataset)) {
    throw Error(ErrorCode::kDatasetMissing, spec.dataset.string());
  }
  return RunExperiment(spec, ReadCsv(spec.dataset), progress);
}

}  // namespace celldx
