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

#ifndef CELLDX_NN_H_
#define CELLDX_NN_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "celldx/corruptor.h"
#include "celldx/encoding.h"

namespace celldx {

inline constexpr double kLeakySlope = 0.01;

struct DenseLayer {
  Matrix weights;  // out x in
  RowVector bias;  // 1 x out
};

// Symmetric encoder/decoder stack. Hidden layers use a leaky rectifier; the
// output layer is linear (numeric spans read raw, categorical spans as logits).
class LayerStack {
 public:
  LayerStack() = default;
  // Throws kInvalidArchitecture unless widths are symmetric with >= 3 entries.
  explicit LayerStack(std::vector<std::size_t> widths);

  // Glorot-uniform weights, zero biases.
  static LayerStack Init(std::vector<std::size_t> widths, std::uint64_t seed);

  const std::vector<std::size_t>& widths() const { return widths_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::size_t num_layers() const { return layers_.size(); }
  std::size_t input_width() const { return widths_.front(); }
  // Index into the activation list of the narrowest layer.
  std::size_t bottleneck() const { return widths_.size() / 2; }
  std::size_t latent_width() const { return widths_[bottleneck()]; }
  std::size_t num_parameters() const;

  friend bool operator==(const LayerStack& a, const LayerStack& b);

 private:
  std::vector<std::size_t> widths_;
  std::vector<DenseLayer> layers_;
};

// Validates widths against an encoded width; throws kInvalidArchitecture.
void CheckArchitecture(const std::vector<std::size_t>& widths, std::size_t encoded_width);

struct ForwardCache {
  std::vector<Matrix> pre;         // pre-activation per layer
  std::vector<Matrix> activation;  // activation[0] is the input batch
};

struct ForwardResult {
  Matrix latent;
  Matrix output;
  ForwardCache cache;
};

ForwardResult Forward(const LayerStack& stack, const Matrix& batch);
Matrix Latent(const LayerStack& stack, const Matrix& batch);
Matrix Reconstruct(const LayerStack& stack, const Matrix& batch);

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<RowVector> biases;

  static Gradients ZerosLike(const LayerStack& stack);
  Gradients& operator+=(const Gradients& other);
};

Gradients Backward(const LayerStack& stack, const ForwardCache& cache,
                   const Matrix& output_grad);

struct LossBreakdown {
  double total = 0.0;
  std::vector<double> per_attribute;
};

// Per-attribute reconstruction loss of one row: negative log-likelihood of the
// target category for categorical spans, squared error for numerics. An
// all-zeros target span is scored as cross-entropy against uniform.
LossBreakdown MixedLoss(const RowVector& output, const RowVector& target, const Layout& layout);

// Mask-weighted combination: alpha * (loss on flagged attributes) +
// (1 - alpha) * (loss on unflagged attributes).
double EnhancedLoss(const RowVector& output, const RowVector& target, const Layout& layout,
                    const std::vector<bool>& mask, double alpha);

struct BatchLoss {
  double value = 0.0;
  Matrix output_grad;  // d value / d output
};

// (1/B) * sum_n sum_d weight(n, d) * L_nd with its gradient.
BatchLoss WeightedBatchLoss(const Matrix& output, const Matrix& target, const Layout& layout,
                            const Matrix& weights);
BatchLoss MixedBatchLoss(const Matrix& output, const Matrix& target, const Layout& layout);
BatchLoss EnhancedBatchLoss(const Matrix& output, const Matrix& target, const Layout& layout,
                            const CorruptionMask& mask, double alpha);

// B x D matrix of per-attribute losses.
Matrix AttributeLosses(const Matrix& output, const Matrix& target, const Layout& layout);

// alpha ~ Beta(0.5, 0.5).
double SampleAlpha(Rng& rng);

struct AdamState {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  Gradients first;
  Gradients second;
  std::uint64_t step = 0;

  static AdamState For(const LayerStack& stack);
};

void AdamStep(LayerStack& stack, const Gradients& grads, AdamState& state, double lr);

// base_lr * 0.5 * (1 + cos(pi * epoch / max_epochs)).
double CosineLr(std::size_t epoch, std::size_t max_epochs, double base_lr);

}  // namespace celldx

#endif  // CELLDX_NN_H_
