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
#include <vector>

#include <gtest/gtest.h>

#include "celldx/corruptor.h"
#include "celldx/error.h"
#include "celldx/explainer.h"
#include "celldx/models.h"
#include "celldx/synthetic.h"
#include "test_util.h"

namespace celldx {
namespace {

TEST(ConfidenceTest, NumericValues) {
  EXPECT_EQ(CellConfidenceNumeric(0.3, 0.3), 0.0);
  EXPECT_NEAR(CellConfidenceNumeric(1.0, 0.0), 1.0 - std::exp(-1.0), 1e-12);
  EXPECT_NEAR(CellConfidenceNumeric(-2.0, 8.0), 1.0, 1e-9);
  double prev = 0.0;
  for (double r = 0.01; r < 5.0; r += 0.01) {
    const double pi = CellConfidenceNumeric(r, 0.0);
    EXPECT_GT(pi, prev);
    prev = pi;
  }
}

TEST(ConfidenceTest, CategoricalUniform) {
  for (int c = 2; c <= 10; ++c) {
    RowVector observed = RowVector::Zero(c);
    observed(c - 1) = 1.0;
    EXPECT_NEAR(CellConfidenceCategorical(RowVector::Zero(c), observed), 1.0 - 1.0 / c, 1e-12);
  }
  const RowVector obs = (RowVector(4) << 0, 0, 1, 0).finished();
  EXPECT_NEAR(CellConfidenceCategorical(RowVector::Zero(4), obs), 0.75, 1e-15);
}

TEST(ConfidenceTest, CategoricalLimitsAndMonotone) {
  const RowVector obs = (RowVector(3) << 0, 1, 0).finished();
  EXPECT_LT(CellConfidenceCategorical((RowVector(3) << -40, 40, -40).finished(), obs), 1e-30);
  EXPECT_EQ(CellConfidenceCategorical((RowVector(3) << 1, 2, 3).finished(), RowVector::Zero(3)),
            1.0);
  double prev = 1.0;
  for (double z = -5.0; z <= 5.0; z += 0.1) {
    const double pi = CellConfidenceCategorical((RowVector(3) << 0.3, z, -0.2).finished(), obs);
    EXPECT_LT(pi, prev);
    prev = pi;
  }
}

TEST(RowScoreTest, Sum) {
  EXPECT_NEAR(RowScore(std::vector<double>{0.2, 0.5, 0.0}), 0.7, 1e-15);
  EXPECT_EQ(RowScore(std::vector<double>(23, 1.0)), 23.0);
  EXPECT_EQ(RowScore(std::vector<double>(5, 0.0)), 0.0);
}

TEST(TopKTest, OrderAndTies) {
  EXPECT_EQ(TopK(std::vector<double>{0.1, 0.9, 0.5}, 2), (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(TopK(std::vector<double>{0.5, 0.5}, 1), (std::vector<std::size_t>{0}));
  EXPECT_EQ(TopK(std::vector<double>{0.2, 0.7, 0.7, 0.1}, 4),
            (std::vector<std::size_t>{1, 2, 0, 3}));
  EXPECT_TRUE(TopK(std::vector<double>{0.2}, 0).empty());
}

TEST(TopKTest, FullKIsPermutation) {
  const Matrix m = testing::RandomMatrix(1, 50, 3);
  auto idx = TopK(std::span(m.data(), 50), 50);
  std::sort(idx.begin(), idx.end());
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(idx[i], i);
}

class ExplainerModelTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    SyntheticSpec spec;
    spec.rows = 1500;
    spec.seed = 31;
    data_ = new RawTable(GenerateSynthetic(spec));
    schema_ = new Schema(FitEncoder(*data_, InferSchema(*data_)));
    TrainConfig tc;
    tc.max_epochs = 120;
    tc.hidden = {32, 8};
    CorruptionConfig cc;
    cc.seed = 7;
    model_ = new TrainedModel(TrainDae(Encode(*data_, *schema_), *schema_, cc, LossMode::kPlain, tc));
  }
  static void TearDownTestSuite() {
    delete data_;
    delete schema_;
    delete model_;
  }
  static RawTable* data_;
  static Schema* schema_;
  static TrainedModel* model_;
};

RawTable* ExplainerModelTest::data_ = nullptr;
Schema* ExplainerModelTest::schema_ = nullptr;
TrainedModel* ExplainerModelTest::model_ = nullptr;

TEST_F(ExplainerModelTest, ScoredBatchInvariants) {
  const ScoredBatch sb = ScoreBatch(*model_, Encode(*data_, *schema_).values);
  const double d = static_cast<double>(schema_->size());
  for (Eigen::Index r = 0; r < sb.confidences.rows(); ++r) {
    EXPECT_GE(sb.confidences.row(r).minCoeff(), 0.0);
    EXPECT_LE(sb.confidences.row(r).maxCoeff(), 1.0);
    EXPECT_NEAR(sb.row_scores[r], sb.confidences.row(r).sum(), 1e-9);
    EXPECT_LE(sb.row_scores[r], d);
  }
}

TEST_F(ExplainerModelTest, ExplanationSelfConsistentAndExcludesSelf) {
  const Matrix enc = Encode(*data_, *schema_).values;
  const LatentIndex index(*model_, enc);
  const LatentMap map = BuildLatentMap(index.latents());
  for (std::size_t r : {0u, 17u, 999u}) {
    const Explanation e = Explain(*model_, data_->row(r), index, r, r, &map);
    EXPECT_NEAR(e.row_score, RowScore(e.confidences()), 1e-9);
    ASSERT_EQ(e.neighbors.size(), kNeighborCount);
    EXPECT_EQ(std::find(e.neighbors.begin(), e.neighbors.end(), r), e.neighbors.end());
    EXPECT_EQ(e.expected_row.size(), schema_->size());
    ASSERT_TRUE(e.latent_xy.has_value());
    const auto j = ExplanationToJson(e);
    EXPECT_EQ(j["cells"].size(), schema_->size());
    EXPECT_EQ(j["neighbors"].size(), kNeighborCount);
  }
  // Without exclusion the row finds itself first.
  const Explanation e = Explain(*model_, data_->row(5), index, 5);
  EXPECT_EQ(e.neighbors.front(), 5u);
}

TEST_F(ExplainerModelTest, NearestMatchesBruteForce) {
  const Matrix enc = Encode(*data_, *schema_).values;
  const LatentIndex index(*model_, enc);
  const RowVector q = index.latents().row(42);
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (i == 42) continue;
    d.push_back({(index.latents().row(static_cast<Eigen::Index>(i)) - q).squaredNorm(), i});
  }
  std::sort(d.begin(), d.end());
  const auto got = index.Nearest(q, 5, 42);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(got[i], d[i].second);
}

TEST_F(ExplainerModelTest, LatentMapProperties) {
  const Matrix lat = LatentIndex(*model_, Encode(*data_, *schema_).values).latents();
  const LatentMap map = BuildLatentMap(lat);
  const auto origin = map.Project(map.mean);
  EXPECT_NEAR(origin[0], 0.0, 1e-12);
  EXPECT_NEAR(origin[1], 0.0, 1e-12);
  for (Eigen::Index r = 0; r < lat.rows(); r += 97) {
    const auto xy = map.Project(lat.row(r));
    EXPECT_NEAR(map.coordinates(r, 0), xy[0], 1e-9);
    EXPECT_NEAR(map.coordinates(r, 1), xy[1], 1e-9);
  }
  const auto c0 = map.coordinates.col(0), c1 = map.coordinates.col(1);
  EXPECT_GE(c0.squaredNorm(), c1.squaredNorm());
}

TEST_F(ExplainerModelTest, LocalizesInjectedNumericError) {
  const Matrix enc = Encode(*data_, *schema_).values;
  const LatentIndex index(*model_, enc);
  Rng rng = MakeRng({13});
  std::uniform_int_distribution<std::size_t> row(0, data_->num_rows() - 1);
  std::uniform_int_distribution<std::size_t> num(schema_->num_categorical(), schema_->size() - 1);
  int hits = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    const std::size_t r = row(rng), d = num(rng);
    std::vector<std::string> values(data_->row(r).begin(), data_->row(r).end());
    const auto& spec = schema_->attribute(d);
    values[d] = FormatReal(*ParseReal(values[d]) + 5.0 * spec.std_dev);
    const Explanation e = Explain(*model_, values, index, r);
    const auto conf = e.confidences();
    hits += static_cast<std::size_t>(std::max_element(conf.begin(), conf.end()) - conf.begin()) == d;
  }
  EXPECT_GE(hits, 80);
}

TEST_F(ExplainerModelTest, CorruptedCellsCarryHigherConfidence) {
  CorruptionConfig cfg;
  cfg.seed = 17;
  cfg.row_fraction = 0.2;
  const CorruptedTable c = CorruptTable(*data_, *schema_, cfg);
  const ScoredBatch sb = ScoreBatch(*model_, Encode(c.table, *schema_).values);
  double on = 0, off = 0;
  std::size_t n_on = 0, n_off = 0;
  for (std::size_t r = 0; r < c.mask.rows(); ++r) {
    for (std::size_t d = 0; d < c.mask.attributes(); ++d) {
      const double v = sb.confidences(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(d));
      if (c.mask.at(r, d)) on += v, ++n_on;
      else off += v, ++n_off;
    }
  }
  EXPECT_GE(c.mask.num_flagged_rows(), 200u);
  EXPECT_GT(on / n_on, off / n_off);
}

TEST_F(ExplainerModelTest, CleanRowScoresLow) {
  CorruptionConfig cfg;
  cfg.seed = 18;
  const CorruptedTable c = CorruptTable(*data_, *schema_, cfg);
  const ScoredBatch sb = ScoreBatch(*model_, Encode(c.table, *schema_).values);
  std::vector<double> scores(sb.row_scores.data(), sb.row_scores.data() + sb.row_scores.size());
  std::vector<double> sorted = scores;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];
  std::size_t below = 0, clean = 0;
  for (std::size_t r = 0; r < scores.size(); ++r) {
    if (c.mask.row_flagged(r)) continue;
    ++clean;
    below += scores[r] <= median;
  }
  // Clean rows dominate the lower half.
  EXPECT_GT(static_cast<double>(below) / clean, 0.5);
}

TEST(ExplainTest, BaselinesUnsupported) {
  const RawTable t = testing::SmallTable(50, 1);
  const Schema s = FitEncoder(t, InferSchema(t));
  const TrainedModel pca = FitPcaModel(Encode(t, s), s, 2);
  try {
    LatentIndex(pca, Encode(t, s).values);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsupportedModelKind);
  }
}

}  // namespace
}  // namespace celldx
