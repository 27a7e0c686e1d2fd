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

#include "celldx/pca.h"

#include <algorithm>

#include "celldx/error.h"

namespace celldx {

namespace {

struct Decomposition {
  RowVector mean;
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // matching columns
};

Decomposition Decompose(const Matrix& data) {
  if (data.rows() < 2) throw Error(ErrorCode::kPrecondition, "PCA needs at least 2 rows");
  Decomposition dec;
  dec.mean = data.colwise().mean();
  const Eigen::MatrixXd centered = data.rowwise() - dec.mean;
  const Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(data.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kRankDeficient, "covariance eigendecomposition failed");
  }
  // Eigen returns ascending order.
  dec.values = solver.eigenvalues().reverse();
  dec.vectors = solver.eigenvectors().rowwise().reverse();
  for (Eigen::Index i = 0; i < dec.values.size(); ++i) dec.values[i] = std::max(0.0, dec.values[i]);
  return dec;
}

PcaModel Truncate(const Decomposition& dec, std::size_t q, bool require_rank) {
  const auto e = static_cast<std::size_t>(dec.values.size());
  if (q < 1 || q > e) throw Error(ErrorCode::kPrecondition, "component count out of range");
  if (require_rank) {
    const double tol = 1e-12 * std::max(1.0, dec.values[0]) * static_cast<double>(e);
    std::size_t nonzero = 0;
    for (std::size_t i = 0; i < e; ++i) nonzero += dec.values[static_cast<Eigen::Index>(i)] > tol;
    if (nonzero < q) {
      throw Error(ErrorCode::kRankDeficient, "only " + std::to_string(nonzero) +
                                                 " nonzero eigenvalues for q = " +
                                                 std::to_string(q));
    }
  }
  PcaModel model;
  model.mean = dec.mean;
  model.basis = dec.vectors.leftCols(static_cast<Eigen::Index>(q));
  model.eigenvalues.assign(dec.values.data(), dec.values.data() + e);
  return model;
}

}  // namespace

PcaModel FitPca(const Matrix& data, std::size_t q, bool require_rank) {
  if (require_rank && static_cast<std::size_t>(data.rows()) <= q) {
    throw Error(ErrorCode::kPrecondition, "PCA needs more rows than components");
  }
  return Truncate(Decompose(data), q, require_rank);
}

PcaModel FitPcaByVariance(const Matrix& data, double variance_target) {
  const Decomposition dec = Decompose(data);
  const double total = dec.values.sum();
  std::size_t q = 1;
  if (total > 0.0) {
    double acc = 0.0;
    for (q = 0; q < static_cast<std::size_t>(dec.values.size());) {
      acc += dec.values[static_cast<Eigen::Index>(q)];
      ++q;
      if (acc >= variance_target * total) break;
    }
  }
  q = std::min<std::size_t>(q, static_cast<std::size_t>(data.rows()) - 1);
  return Truncate(dec, std::max<std::size_t>(q, 1), false);
}

Matrix PcaProject(const PcaModel& model, const Matrix& batch) {
  if (batch.cols() != model.mean.size()) {
    throw Error(ErrorCode::kShapeMismatch, "batch width does not match PCA model");
  }
  return (batch.rowwise() - model.mean) * model.basis;
}

Matrix PcaReconstruct(const PcaModel& model, const Matrix& batch) {
  Matrix out = PcaProject(model, batch) * model.basis.transpose();
  out.rowwise() += model.mean;
  return out;
}

}  // namespace celldx
