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

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "celldx/corruptor.h"
#include "celldx/error.h"
#include "celldx/gmm.h"
#include "celldx/pca.h"
#include "test_util.h"

namespace celldx {
namespace {

std::vector<double> TwoClusters(std::size_t n, double separation, std::uint64_t seed) {
  Rng rng = MakeRng({seed, 77});
  std::normal_distribution<double> a(0.0, 1.0), b(separation, 1.0);
  std::bernoulli_distribution pick(0.4);
  std::vector<double> x(n);
  for (auto& v : x) v = pick(rng) ? a(rng) : b(rng);
  return x;
}

TEST(GmmTest, DensityIntegratesToOne) {
  GaussianMixture1D g{{0.3, 0.7}, {-2.0, 3.0}, {0.5, 2.0}};
  // Trapezoid over a wide window.
  double integral = 0.0;
  const double lo = -20, hi = 25, h = 1e-3;
  for (double x = lo; x < hi; x += h) integral += 0.5 * h * (g.Density(x) + g.Density(x + h));
  EXPECT_NEAR(integral, 1.0, 1e-6);
  EXPECT_NEAR(g.Mean(), 0.3 * -2.0 + 0.7 * 3.0, 1e-15);
  EXPECT_EQ(g.num_free_parameters(), 5u);
}

TEST(GmmTest, LogDensityMatchesClosedForm) {
  GaussianMixture1D g{{1.0}, {1.0}, {4.0}};
  const double x = 2.5;
  const double expected = -0.5 * std::log(2 * std::numbers::pi * 4.0) - (x - 1) * (x - 1) / 8.0;
  EXPECT_NEAR(g.LogDensity(x), expected, 1e-14);
}

TEST(EmTest, LogLikelihoodNonDecreasing) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto data = TwoClusters(300, 3.0 + static_cast<double>(seed % 4), seed);
    for (std::size_t k = 1; k <= 4; ++k) {
      Rng rng = MakeRng({seed, k});
      const EmTrace t = FitEm(data, k, EmOptions{}, rng);
      ASSERT_FALSE(t.log_likelihood.empty());
      for (std::size_t i = 1; i < t.log_likelihood.size(); ++i) {
        const double prev = t.log_likelihood[i - 1];
        EXPECT_GE(t.log_likelihood[i], prev - 1e-9 * std::abs(prev)) << seed << " k=" << k;
      }
    }
  }
}

TEST(EmTest, RecoversSeparatedComponents) {
  const auto data = TwoClusters(4000, 8.0, 3);
  Rng rng = MakeRng({3});
  const EmTrace t = FitEm(data, 2, EmOptions{}, rng);
  auto m = t.model;
  const std::size_t lo = m.means[0] < m.means[1] ? 0 : 1;
  EXPECT_NEAR(m.means[lo], 0.0, 0.15);
  EXPECT_NEAR(m.means[1 - lo], 8.0, 0.15);
  EXPECT_NEAR(m.weights[lo], 0.4, 0.03);
  EXPECT_NEAR(m.variances[lo], 1.0, 0.15);
}

TEST(EmTest, VarianceFloorOnDegenerateData) {
  std::vector<double> data(50, 1.0);
  data.push_back(2.0);
  Rng rng = MakeRng({1});
  const EmTrace t = FitEm(data, 2, EmOptions{}, rng);
  for (double v : t.model.variances) EXPECT_GT(v, 0.0);
  EXPECT_TRUE(std::isfinite(t.model.LogLikelihood(data)));
}

TEST(BicTest, SelectsTwoForSeparatedMixture) {
  int correct = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto data = TwoClusters(500, 6.0, seed + 1000);
    const GmmSelection sel = FitGmmBic(data, 5, EmOptions{}, seed);
    correct += sel.model.components() == 2;
    EXPECT_EQ(sel.bic.size(), 5u);
  }
  EXPECT_GE(correct, 18);
}

TEST(BicTest, FormulaMatchesDefinition) {
  const auto data = TwoClusters(100, 5.0, 4);
  GaussianMixture1D g{{0.5, 0.5}, {0.0, 5.0}, {1.0, 1.0}};
  const double expected = 5.0 * std::log(100.0) - 2.0 * g.LogLikelihood(data);
  EXPECT_NEAR(Bic(g, data), expected, 1e-9);
}

TEST(BicTest, SingleGaussianForUnimodalData) {
  Rng rng = MakeRng({5});
  std::normal_distribution<double> n(3.0, 2.0);
  std::vector<double> data(1000);
  for (auto& v : data) v = n(rng);
  EXPECT_EQ(FitGmmBic(data, 5, EmOptions{}, 1).model.components(), 1u);
}

Matrix CorrelatedData(Eigen::Index n, std::uint64_t seed) {
  const Matrix z = testing::RandomMatrix(n, 2, seed);
  const Matrix mix = (Matrix(2, 4) << 1, 2, 0, 1, 0, 1, 3, -1).finished();
  return z * mix + 0.01 * testing::RandomMatrix(n, 4, seed + 1);
}

TEST(PcaTest, OrthonormalBasisAndDescendingEigenvalues) {
  const Matrix x = CorrelatedData(300, 1);
  const PcaModel m = FitPca(x, 3);
  const Eigen::MatrixXd gram = m.basis.transpose() * m.basis;
  EXPECT_LT((gram - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
  ASSERT_EQ(m.eigenvalues.size(), 4u);
  for (std::size_t i = 1; i < 4; ++i) EXPECT_GE(m.eigenvalues[i - 1], m.eigenvalues[i]);
}

TEST(PcaTest, FullRankReconstructionIsIdentity) {
  const Matrix x = CorrelatedData(100, 2);
  const PcaModel m = FitPca(x, 4);
  EXPECT_LT((PcaReconstruct(m, x) - x).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(PcaTest, ReconstructionIsProjection) {
  const Matrix x = CorrelatedData(200, 3);
  const PcaModel m = FitPca(x, 2);
  const Matrix once = PcaReconstruct(m, x);
  EXPECT_LT((PcaReconstruct(m, once) - once).cwiseAbs().maxCoeff(), 1e-10);
  // Residual orthogonal to the subspace.
  const Matrix resid = x - once;
  EXPECT_LT((resid * m.basis).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(PcaTest, EigenvaluesSumToTotalVariance) {
  const Matrix x = CorrelatedData(250, 4);
  const PcaModel m = FitPca(x, 1);
  const RowVector mean = x.colwise().mean();
  const double total = (x.rowwise() - mean).squaredNorm() / static_cast<double>(x.rows());
  double sum = 0.0;
  for (double e : m.eigenvalues) sum += e;
  EXPECT_NEAR(sum, total, 1e-9 * total);
}

TEST(PcaTest, VarianceTargetPicksTwo) {
  EXPECT_EQ(FitPcaByVariance(CorrelatedData(300, 5), 0.9).components(), 2u);
}

TEST(PcaTest, RankDeficientRejected) {
  const Matrix x = testing::RandomMatrix(50, 2, 6) * (Matrix(2, 4) << 1, 0, 1, 0, 0, 1, 0, 1).finished();
  EXPECT_THROW(FitPca(x, 3), Error);
  EXPECT_NO_THROW(FitPca(x, 3, false));
}

}  // namespace
}  // namespace celldx
