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

#ifndef CELLDX_PCA_H_
#define CELLDX_PCA_H_

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "celldx/encoding.h"

namespace celldx {

struct PcaModel {
  RowVector mean;                   // 1 x E
  Eigen::MatrixXd basis;            // E x q, orthonormal columns
  std::vector<double> eigenvalues;  // all E covariance eigenvalues, descending

  std::size_t components() const { return static_cast<std::size_t>(basis.cols()); }
};

// Mean-centered eigendecomposition of the covariance (divisor N), keeping
// the top q directions. Throws kRankDeficient when fewer than q eigenvalues
// are numerically nonzero and `require_rank` is set.
PcaModel FitPca(const Matrix& data, std::size_t q, bool require_rank = true);

// Smallest q whose leading eigenvalues explain at least `variance_target` of
// the total variance.
PcaModel FitPcaByVariance(const Matrix& data, double variance_target = 0.9);

Matrix PcaProject(const PcaModel& model, const Matrix& batch);
// mean + basis * basis^T * (x - mean)
Matrix PcaReconstruct(const PcaModel& model, const Matrix& batch);

}  // namespace celldx

#endif  // CELLDX_PCA_H_
