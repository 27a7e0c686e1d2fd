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

#ifndef CELLDX_GMM_H_
#define CELLDX_GMM_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "celldx/corruptor.h"

namespace celldx {

struct GaussianMixture1D {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> variances;

  std::size_t components() const { return weights.size(); }
  double LogDensity(double x) const;
  double Density(double x) const;
  // Weight-averaged component mean.
  double Mean() const;
  double LogLikelihood(std::span<const double> data) const;
  std::size_t num_free_parameters() const { return 3 * components() - 1; }
};

struct EmOptions {
  std::size_t max_iterations = 300;
  double tolerance = 1e-8;  // relative change in mean log-likelihood
  // Variances are clamped to variance_floor_ratio * var(data).
  double variance_floor_ratio = 1e-6;
  std::size_t restarts = 10;
};

struct EmTrace {
  GaussianMixture1D model;
  std::vector<double> log_likelihood;  // one entry per completed iteration
  bool hit_floor = false;
};

// One EM run from a k-means++ style initialization.
EmTrace FitEm(std::span<const double> data, std::size_t k, const EmOptions& options, Rng& rng);

double Bic(const GaussianMixture1D& model, std::span<const double> data);

struct GmmSelection {
  GaussianMixture1D model;
  std::vector<double> bic;  // best BIC per component count 1..k_max
};

// Best of `restarts` EM runs per component count; picks the count with the
// lowest BIC. Throws kEmDegenerate if no run yields a finite likelihood.
GmmSelection FitGmmBic(std::span<const double> data, std::size_t k_max, const EmOptions& options,
                       std::uint64_t seed);

}  // namespace celldx

#endif  // CELLDX_GMM_H_
