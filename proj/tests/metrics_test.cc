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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "celldx/corruptor.h"
#include "celldx/error.h"
#include "celldx/metrics.h"
#include "celldx/models.h"
#include "celldx/synthetic.h"
#include "metric_oracles.h"
#include "test_util.h"

namespace celldx {
namespace {

struct Instance {
  std::vector<double> scores;
  std::vector<bool> labels;
};

// Scores from a small grid so that ties are common.
Instance RandomInstance(Rng& rng, bool need_positive) {
  std::uniform_int_distribution<std::size_t> size(1, 12);
  std::uniform_int_distribution<int> grid(0, 5);
  std::bernoulli_distribution label(0.4);
  Instance in;
  const std::size_t n = size(rng);
  for (std::size_t i = 0; i < n; ++i) {
    in.scores.push_back(grid(rng) / 5.0);
    in.labels.push_back(label(rng));
  }
  if (need_positive && std::none_of(in.labels.begin(), in.labels.end(), [](bool b) { return b; })) {
    in.labels[0] = true;
  }
  return in;
}

TEST(PrecisionAtKTest, Examples) {
  EXPECT_EQ(PrecisionAtK({true, false, true, false}, std::vector<double>{0.9, 0.8, 0.1, 0.0}, 2),
            0.5);
  EXPECT_EQ(PrecisionAtK({false, true, true}, std::vector<double>{0.1, 0.9, 0.5}, 2), 1.0);
}

TEST(PrecisionAtKTest, MatchesOracleForEveryK) {
  Rng rng = MakeRng({1});
  for (int i = 0; i < 1000; ++i) {
    const Instance in = RandomInstance(rng, false);
    for (std::size_t k = 1; k <= in.scores.size(); ++k) {
      EXPECT_EQ(PrecisionAtK(in.labels, in.scores, k),
                testing::BruteForcePrecisionAtK(in.labels, in.scores, k));
    }
  }
}

TEST(PrecisionAtKTest, RandomRankingNearBaseRate) {
  double sum = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng = MakeRng({s, 2});
    std::uniform_real_distribution<double> u;
    std::vector<bool> truth(10000, false);
    for (auto r : SelectRows(10000, 0.03, rng)) truth[r] = true;
    std::vector<double> scores(10000);
    for (auto& v : scores) v = u(rng);
    sum += PrecisionAtK(truth, scores, 300);
  }
  EXPECT_NEAR(sum / 20.0, 0.03, 0.02);
}

TEST(AveragePrecisionTest, Examples) {
  EXPECT_NEAR(AveragePrecision(std::vector<double>{0.9, 0.8, 0.7}, {true, false, true}), 5.0 / 6.0,
              1e-15);
  EXPECT_EQ(AveragePrecision(std::vector<double>{0.9, 0.8, 0.1}, {true, true, false}), 1.0);
  EXPECT_EQ(AveragePrecision(std::vector<double>{0.3, 0.2}, {true, true}), 1.0);
}

TEST(AveragePrecisionTest, TiesGroupedAtOneThreshold) {
  // All tied: one threshold, precision = positive rate.
  EXPECT_NEAR(AveragePrecision(std::vector<double>{0.5, 0.5, 0.5, 0.5}, {true, false, false, true}),
              0.5, 1e-15);
}

TEST(AveragePrecisionTest, NoPositivesSignalsSkip) {
  try {
    AveragePrecision(std::vector<double>{0.5, 0.1}, {false, false});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoPositives);
  }
}

TEST(AveragePrecisionTest, MatchesRationalOracle) {
  Rng rng = MakeRng({3});
  for (int i = 0; i < 1000; ++i) {
    const Instance in = RandomInstance(rng, true);
    const double ap = AveragePrecision(in.scores, in.labels);
    EXPECT_NEAR(ap, testing::ToDouble(testing::BruteForceAp(in.scores, in.labels)), 1e-12);
    EXPECT_GE(ap, 0.0);
    EXPECT_LE(ap, 1.0);
  }
}

TEST(AveragePrecisionTest, PermutationInvariant) {
  Rng rng = MakeRng({4});
  for (int i = 0; i < 200; ++i) {
    Instance in = RandomInstance(rng, true);
    const double ap = AveragePrecision(in.scores, in.labels);
    std::vector<std::size_t> perm(in.scores.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Instance p;
    for (auto j : perm) {
      p.scores.push_back(in.scores[j]);
      p.labels.push_back(in.labels[j]);
    }
    EXPECT_NEAR(AveragePrecision(p.scores, p.labels), ap, 1e-15);
  }
}

TEST(ExpectedValueTest, NumericExamples) {
  EXPECT_EQ(ExpectedValueErrorNumeric(std::vector<double>{2.0}, std::vector<double>{1.0}, 1.0),
            1.0);
  EXPECT_EQ(ExpectedValueErrorNumeric(std::vector<double>{2.0}, std::vector<double>{1.0}, 2.0),
            0.25);
  EXPECT_EQ(ExpectedValueErrorNumeric(std::vector<double>{2.0, 3.0},
                                      std::vector<double>{2.0, 3.0}, 1.5),
            0.0);
}

TEST(ExpectedValueTest, BrierExamples) {
  const Matrix truth = (Matrix(1, 2) << 1, 0).finished();
  EXPECT_NEAR(ExpectedValueErrorCategorical(truth, (Matrix(1, 2) << 0.8, 0.2).finished()), 0.04,
              1e-15);
  EXPECT_EQ(ExpectedValueErrorCategorical(truth, truth), 0.0);
  EXPECT_EQ(ExpectedValueErrorCategorical(truth, (Matrix(1, 2) << 0, 1).finished()), 1.0);
}

TEST(ExpectedValueTest, BrierBounds) {
  Rng rng = MakeRng({5});
  std::uniform_int_distribution<int> width(2, 8), rows(1, 6);
  std::gamma_distribution<double> g(0.3, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const int c = width(rng), n = rows(rng);
    Matrix truth = Matrix::Zero(n, c), pred(n, c);
    std::uniform_int_distribution<int> pick(0, c - 1);
    for (int r = 0; r < n; ++r) {
      truth(r, pick(rng)) = 1.0;
      for (int j = 0; j < c; ++j) pred(r, j) = g(rng) + 1e-300;
      pred.row(r) /= pred.row(r).sum();
    }
    const double ev = ExpectedValueErrorCategorical(truth, pred);
    EXPECT_GE(ev, 0.0);
    EXPECT_LE(ev, 1.0);
  }
}

TEST(EvaluateTest, PerfectAndEmptyMasks) {
  SyntheticSpec spec;
  spec.rows = 600;
  spec.seed = 3;
  const RawTable data = GenerateSynthetic(spec);
  const Schema s = FitEncoder(data, InferSchema(data));
  TrainConfig tc;
  tc.max_epochs = 20;
  tc.hidden = {16, 4};
  const TrainedModel ae = TrainAe(Encode(data, s), s, tc);

  CorruptionConfig none;
  none.row_fraction = 0.0;
  const CorruptedTable clean = CorruptTable(data, s, none);
  const EvalReport empty = Evaluate(ae, clean.table, {clean.mask, clean.originals});
  EXPECT_EQ(empty.k, 0u);
  EXPECT_TRUE(std::isnan(empty.p_at_k));
  EXPECT_TRUE(std::isnan(empty.map_categorical));
  const auto row = ReportCsvRow(empty);
  EXPECT_NE(std::find(row.begin(), row.end(), "NA"), row.end());

  CorruptionConfig cfg;
  cfg.seed = 9;
  cfg.row_fraction = 0.05;
  const CorruptedTable c = CorruptTable(data, s, cfg);
  const GroundTruth truth{c.mask, c.originals};
  const EvalReport a = Evaluate(ae, c.table, truth);
  const EvalReport b = Evaluate(ae, c.table, truth);
  EXPECT_TRUE(a == b);
  EXPECT_EQ(a.k, 30u);
  EXPECT_GE(a.p_at_k, 0.0);
  EXPECT_LE(a.p_at_k, 1.0);
  EXPECT_GE(a.mev_categorical, 0.0);
  EXPECT_LE(a.mev_categorical, 1.0);
  EXPECT_EQ(a.ap.size(), s.size());
}

TEST(EvaluateTest, UntrainedModelNearBaseRate) {
  SyntheticSpec spec;
  spec.rows = 5000;
  spec.seed = 4;
  const RawTable data = GenerateSynthetic(spec);
  const Schema s = FitEncoder(data, InferSchema(data));
  double sum = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TrainConfig tc;
    tc.max_epochs = 0;
    tc.hidden = {16, 4};
    tc.seed = seed;
    const TrainedModel m = TrainAe(Encode(data, s), s, tc);
    CorruptionConfig cfg;
    cfg.seed = seed;
    const CorruptedTable c = CorruptTable(data, s, cfg);
    sum += Evaluate(m, c.table, {c.mask, c.originals}).p_at_k;
  }
  // Random-init networks still notice huge numeric noise, so the bound is
  // loose; the point is that training matters (see the end-to-end gate).
  EXPECT_LT(sum / 5.0, 0.6);
}

TEST(AggregateTest, MeanAndPopulationStd) {
  EvalReport a, b, c;
  a.model = b.model = "dae";
  c.model = "pca";
  a.p_at_k = 0.8;
  b.p_at_k = 0.6;
  c.p_at_k = 0.5;
  const auto agg = Aggregate({a, b, c});
  ASSERT_EQ(agg.size(), 2u);
  EXPECT_EQ(agg[0].model, "dae");
  EXPECT_EQ(agg[0].runs, 2u);
  EXPECT_NEAR(agg[0].p_at_k.mean, 0.7, 1e-15);
  EXPECT_NEAR(agg[0].p_at_k.std_dev, 0.1, 1e-15);
  EXPECT_EQ(agg[1].p_at_k.std_dev, 0.0);
}

}  // namespace
}  // namespace celldx
