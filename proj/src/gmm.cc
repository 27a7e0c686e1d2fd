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

#include "celldx/gmm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "celldx/error.h"

namespace celldx {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

double LogNormalPdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (kLogTwoPi + std::log(var) + d * d / var);
}

double LogSumExp(std::span<const double> v) {
  const double top = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(top)) return top;
  double s = 0.0;
  for (double x : v) s += std::exp(x - top);
  return top + std::log(s);
}

double Variance(std::span<const double> data) {
  double mean = 0.0;
  for (double x : data) mean += x;
  mean /= static_cast<double>(data.size());
  double ss = 0.0;
  for (double x : data) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(data.size());
}

std::vector<double> SeedMeans(std::span<const double> data, std::size_t k, Rng& rng) {
  std::vector<double> means;
  std::uniform_int_distribution<std::size_t> first(0, data.size() - 1);
  means.push_back(data[first(rng)]);
  std::vector<double> dist(data.size());
  while (means.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (double m : means) best = std::min(best, (data[i] - m) * (data[i] - m));
      dist[i] = best;
      total += best;
    }
    if (total == 0.0) {
      means.push_back(data[first(rng)]);
      continue;
    }
    std::discrete_distribution<std::size_t> pick(dist.begin(), dist.end());
    means.push_back(data[pick(rng)]);
  }
  return means;
}

}  // namespace

double GaussianMixture1D::LogDensity(double x) const {
  std::vector<double> terms(components());
  for (std::size_t j = 0; j < components(); ++j) {
    terms[j] = std::log(weights[j]) + LogNormalPdf(x, means[j], variances[j]);
  }
  return LogSumExp(terms);
}

double GaussianMixture1D::Density(double x) const { return std::exp(LogDensity(x)); }

double GaussianMixture1D::Mean() const {
  double m = 0.0;
  for (std::size_t j = 0; j < components(); ++j) m += weights[j] * means[j];
  return m;
}

double GaussianMixture1D::LogLikelihood(std::span<const double> data) const {
  double ll = 0.0;
  for (double x : data) ll += LogDensity(x);
  return ll;
}

EmTrace FitEm(std::span<const double> data, std::size_t k, const EmOptions& options, Rng& rng) {
  if (data.size() < 2 || k == 0) {
    throw Error(ErrorCode::kPrecondition, "EM needs at least 2 points and 1 component");
  }
  const std::size_t n = data.size();
  const double data_var = std::max(Variance(data), std::numeric_limits<double>::min());
  const double floor = options.variance_floor_ratio * data_var;

  EmTrace trace;
  auto& gm = trace.model;
  gm.means = SeedMeans(data, k, rng);
  gm.weights.assign(k, 1.0 / static_cast<double>(k));
  gm.variances.assign(k, data_var);

  std::vector<double> resp(n * k);
  std::vector<double> terms(k);
  double prev = -std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    // E-step; the likelihood recorded is that of the parameters entering it.
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        terms[j] = std::log(gm.weights[j]) + LogNormalPdf(data[i], gm.means[j], gm.variances[j]);
      }
      const double lse = LogSumExp(terms);
      ll += lse;
      for (std::size_t j = 0; j < k; ++j) resp[i * k + j] = std::exp(terms[j] - lse);
    }
    if (!std::isfinite(ll)) {
      throw Error(ErrorCode::kEmDegenerate, "non-finite mixture likelihood");
    }
    trace.log_likelihood.push_back(ll);
    if (it > 0 && std::abs(ll - prev) <= options.tolerance * std::abs(ll)) break;
    prev = ll;

    // M-step.
    for (std::size_t j = 0; j < k; ++j) {
      double nk = 0.0;
      double sx = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        nk += resp[i * k + j];
        sx += resp[i * k + j] * data[i];
      }
      if (nk <= std::numeric_limits<double>::min()) {
        // Empty component: keep its parameters, give it no mass.
        gm.weights[j] = std::numeric_limits<double>::min();
        continue;
      }
      const double mean = sx / nk;
      double ss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = data[i] - mean;
        ss += resp[i * k + j] * d * d;
      }
      double var = ss / nk;
      if (var < floor) {
        var = floor;
        trace.hit_floor = true;
      }
      gm.weights[j] = nk / static_cast<double>(n);
      gm.means[j] = mean;
      gm.variances[j] = var;
    }
    double wsum = 0.0;
    for (double w : gm.weights) wsum += w;
    for (double& w : gm.weights) w /= wsum;
  }
  return trace;
}

double Bic(const GaussianMixture1D& model, std::span<const double> data) {
  return -2.0 * model.LogLikelihood(data) +
         static_cast<double>(model.num_free_parameters()) *
             std::log(static_cast<double>(data.size()));
}

GmmSelection FitGmmBic(std::span<const double> data, std::size_t k_max, const EmOptions& options,
                       std::uint64_t seed) {
  if (k_max == 0) throw Error(ErrorCode::kPrecondition, "k_max must be >= 1");
  GmmSelection sel;
  double best_bic = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k <= k_max; ++k) {
    double best_ll = -std::numeric_limits<double>::infinity();
    GaussianMixture1D best_k;
    const std::size_t restarts = k == 1 ? 1 : std::max<std::size_t>(1, options.restarts);
    for (std::size_t r = 0; r < restarts; ++r) {
      Rng rng = MakeRng({seed, k, r});
      try {
        EmTrace t = FitEm(data, k, options, rng);
        const double ll = t.model.LogLikelihood(data);
        if (std::isfinite(ll) && ll > best_ll) {
          best_ll = ll;
          best_k = std::move(t.model);
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kEmDegenerate) throw;
      }
    }
    if (!std::isfinite(best_ll)) {
      sel.bic.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    const double bic = Bic(best_k, data);
    sel.bic.push_back(bic);
    if (bic < best_bic) {
      best_bic = bic;
      sel.model = std::move(best_k);
    }
  }
  if (sel.model.components() == 0) {
    throw Error(ErrorCode::kEmDegenerate, "no component count produced a finite fit");
  }
  return sel;
}

}  // namespace celldx
