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

#ifndef CELLDX_METRICS_H_
#define CELLDX_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "celldx/corruptor.h"
#include "celldx/explainer.h"
#include "celldx/models.h"

namespace celldx {

// True anomalies among the k highest scores, divided by k. Ranking follows
// TopK (descending, ties by ascending index).
double PrecisionAtK(const std::vector<bool>& truth, std::span<const double> scores, std::size_t k);

// Step integration of the precision/recall curve over distinct descending
// thresholds; tied scores form one threshold. Throws kNoPositives.
double AveragePrecision(std::span<const double> scores, const std::vector<bool>& labels);

// mean over corrupted cells of (x_o - x_hat)^2 / sigma^2, raw scale.
double ExpectedValueErrorNumeric(std::span<const double> originals,
                                 std::span<const double> reconstructions, double sigma);

// Brier score halved to [0, 1]; one row per corrupted cell.
double ExpectedValueErrorCategorical(const Matrix& truth, const Matrix& predicted);

struct GroundTruth {
  CorruptionMask mask;
  std::map<CellKey, std::string> originals;

  std::vector<bool> row_labels() const { return mask.row_labels(); }
};

struct EvalReport {
  std::string model;
  std::uint64_t seed = 0;
  std::string ranking = "confidence";
  std::size_t k = 0;
  // NaN marks "not applicable" (no anomalies / no corrupted cells of a kind).
  double p_at_k = 0.0;
  double map_categorical = 0.0;
  double map_numeric = 0.0;
  double mev_categorical = 0.0;
  double mev_numeric_log = 0.0;
  std::vector<std::string> attributes;
  std::vector<double> ap;  // NaN for skipped attributes
  std::vector<double> ev;

  friend bool operator==(const EvalReport&, const EvalReport&);
};

// Scores the corrupted test table, then computes P@K (K = number of true
// anomalies), per-attribute AP over cell scores and expected-value errors on
// the corrupted cells. Attributes without corrupted cells are left out of
// the means.
EvalReport Evaluate(const TrainedModel& model, const RawTable& corrupted, const GroundTruth& truth,
                    RankBy ranking = RankBy::kConfidence);

nlohmann::json ReportToJson(const EvalReport& report);
std::vector<std::string> ReportCsvHeader();
std::vector<std::string> ReportCsvRow(const EvalReport& report);

struct MetricSummary {
  double mean = 0.0;
  double std_dev = 0.0;  // population form; 0 for a single run
};

struct AggregateReport {
  std::string model;
  std::size_t runs = 0;
  MetricSummary p_at_k, map_categorical, map_numeric, mev_categorical, mev_numeric_log;
};

// Groups by model name (first-appearance order).
std::vector<AggregateReport> Aggregate(const std::vector<EvalReport>& reports);
nlohmann::json AggregateToJson(const AggregateReport& a);
RawTable ReportsToTable(const std::vector<EvalReport>& reports);
RawTable AggregatesToTable(const std::vector<AggregateReport>& aggregates);

}  // namespace celldx

#endif  // CELLDX_METRICS_H_
