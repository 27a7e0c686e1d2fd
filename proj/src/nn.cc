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

#include "celldx/nn.h"

#include <cmath>
#include <numbers>

#include "celldx/error.h"

namespace celldx {

namespace {

Matrix LeakyRelu(const Matrix& x) {
  return x.unaryExpr([](double v) { return v > 0.0 ? v : kLeakySlope * v; });
}

Matrix LeakyReluGrad(const Matrix& pre) {
  return pre.unaryExpr([](double v) { return v > 0.0 ? 1.0 : kLeakySlope; });
}

void CheckWidths(const std::vector<std::size_t>& widths) {
  if (widths.size() < 3 || widths.size() % 2 == 0) {
    throw Error(ErrorCode::kInvalidArchitecture, "need an odd number (>= 3) of layer widths");
  }
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (widths[i] == 0) throw Error(ErrorCode::kInvalidArchitecture, "zero layer width");
    if (widths[i] != widths[widths.size() - 1 - i]) {
      throw Error(ErrorCode::kInvalidArchitecture, "widths must be symmetric");
    }
  }
}

}  // namespace

LayerStack::LayerStack(std::vector<std::size_t> widths) : widths_(std::move(widths)) {
  CheckWidths(widths_);
  for (std::size_t i = 0; i + 1 < widths_.size(); ++i) {
    const auto in = static_cast<Eigen::Index>(widths_[i]);
    const auto out = static_cast<Eigen::Index>(widths_[i + 1]);
    layers_.push_back({Matrix::Zero(out, in), RowVector::Zero(out)});
  }
}

LayerStack LayerStack::Init(std::vector<std::size_t> widths, std::uint64_t seed) {
  LayerStack stack(std::move(widths));
  Rng rng = MakeRng({seed, 0x6c61796572});
  for (auto& layer : stack.layers_) {
    const double a = std::sqrt(6.0 / static_cast<double>(layer.weights.rows() + layer.weights.cols()));
    std::uniform_real_distribution<double> u(-a, a);
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = u(rng);
    }
  }
  return stack;
}

std::size_t LayerStack::num_parameters() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

bool operator==(const LayerStack& a, const LayerStack& b) {
  if (a.widths_ != b.widths_) return false;
  for (std::size_t i = 0; i < a.layers_.size(); ++i) {
    if (a.layers_[i].weights != b.layers_[i].weights || a.layers_[i].bias != b.layers_[i].bias) {
      return false;
    }
  }
  return true;
}

void CheckArchitecture(const std::vector<std::size_t>& widths, std::size_t encoded_width) {
  CheckWidths(widths);
  if (widths.front() != encoded_width) {
    throw Error(ErrorCode::kInvalidArchitecture,
                "input width " + std::to_string(widths.front()) + " != encoded width " +
                    std::to_string(encoded_width));
  }
}

ForwardResult Forward(const LayerStack& stack, const Matrix& batch) {
  if (static_cast<std::size_t>(batch.cols()) != stack.input_width()) {
    throw Error(ErrorCode::kShapeMismatch, "batch width does not match network input");
  }
  ForwardResult res;
  auto& cache = res.cache;
  cache.activation.push_back(batch);
  const std::size_t n = stack.num_layers();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& layer = stack.layers()[i];
    Matrix z = cache.activation.back() * layer.weights.transpose();
    z.rowwise() += layer.bias;
    cache.activation.push_back(i + 1 == n ? z : LeakyRelu(z));
    cache.pre.push_back(std::move(z));
  }
  res.latent = cache.activation[stack.bottleneck()];
  res.output = cache.activation.back();
  return res;
}

Matrix Latent(const LayerStack& stack, const Matrix& batch) {
  if (static_cast<std::size_t>(batch.cols()) != stack.input_width()) {
    throw Error(ErrorCode::kShapeMismatch, "batch width does not match network input");
  }
  Matrix a = batch;
  for (std::size_t i = 0; i < stack.bottleneck(); ++i) {
    const auto& layer = stack.layers()[i];
    Matrix z = a * layer.weights.transpose();
    z.rowwise() += layer.bias;
    a = LeakyRelu(z);
  }
  return a;
}

Matrix Reconstruct(const LayerStack& stack, const Matrix& batch) {
  return Forward(stack, batch).output;
}

Gradients Gradients::ZerosLike(const LayerStack& stack) {
  Gradients g;
  for (const auto& l : stack.layers()) {
    g.weights.push_back(Matrix::Zero(l.weights.rows(), l.weights.cols()));
    g.biases.push_back(RowVector::Zero(l.bias.size()));
  }
  return g;
}

Gradients& Gradients::operator+=(const Gradients& other) {
  for (std::size_t i = 0; i < weights.size(); ++i) {
    weights[i] += other.weights[i];
    biases[i] += other.biases[i];
  }
  return *this;
}

Gradients Backward(const LayerStack& stack, const ForwardCache& cache, const Matrix& output_grad) {
  const std::size_t n = stack.num_layers();
  if (cache.pre.size() != n || output_grad.rows() != cache.pre.back().rows() ||
      output_grad.cols() != cache.pre.back().cols()) {
    throw Error(ErrorCode::kShapeMismatch, "gradient does not match forward cache");
  }
  Gradients g;
  g.weights.resize(n);
  g.biases.resize(n);
  Matrix delta = output_grad;
  for (std::size_t i = n; i-- > 0;) {
    g.weights[i] = delta.transpose() * cache.activation[i];
    g.biases[i] = delta.colwise().sum();
    if (i > 0) {
      delta = (delta * stack.layers()[i].weights).cwiseProduct(LeakyReluGrad(cache.pre[i - 1]));
    }
  }
  return g;
}

namespace {

// Loss of one attribute span and, optionally, its gradient written to `grad`.
double SpanLoss(const double* out, const double* target, std::size_t width, bool categorical,
                double* grad) {
  if (!categorical) {
    const double r = out[0] - target[0];
    if (grad) grad[0] = 2.0 * r;
    return r * r;
  }
  double top = out[0];
  for (std::size_t c = 1; c < width; ++c) top = std::max(top, out[c]);
  double z = 0.0;
  for (std::size_t c = 0; c < width; ++c) z += std::exp(out[c] - top);
  const double log_z = std::log(z) + top;
  double mass = 0.0;
  for (std::size_t c = 0; c < width; ++c) mass += target[c];
  // All-zeros target (out-of-vocabulary value): uniform target distribution.
  const bool uniform = mass == 0.0;
  const double inv = 1.0 / static_cast<double>(width);
  double loss = 0.0;
  for (std::size_t c = 0; c < width; ++c) {
    const double t = uniform ? inv : target[c] / mass;
    if (t != 0.0) loss -= t * (out[c] - log_z);
    if (grad) grad[c] = std::exp(out[c] - log_z) - t;
  }
  return loss;
}

void CheckShapes(const Matrix& output, const Matrix& target, const Layout& layout) {
  if (output.rows() != target.rows() || output.cols() != target.cols() ||
      static_cast<std::size_t>(output.cols()) != layout.width) {
    throw Error(ErrorCode::kShapeMismatch, "loss inputs do not match layout");
  }
}

}  // namespace

LossBreakdown MixedLoss(const RowVector& output, const RowVector& target, const Layout& layout) {
  if (static_cast<std::size_t>(output.size()) != layout.width ||
      output.size() != target.size()) {
    throw Error(ErrorCode::kShapeMismatch, "loss inputs do not match layout");
  }
  LossBreakdown b;
  b.per_attribute.resize(layout.num_attributes());
  for (std::size_t d = 0; d < layout.num_attributes(); ++d) {
    const Span s = layout.spans[d];
    b.per_attribute[d] = SpanLoss(output.data() + s.start, target.data() + s.start, s.width,
                                  layout.categorical[d], nullptr);
    b.total += b.per_attribute[d];
  }
  return b;
}

double EnhancedLoss(const RowVector& output, const RowVector& target, const Layout& layout,
                    const std::vector<bool>& mask, double alpha) {
  if (mask.size() != layout.num_attributes()) {
    throw Error(ErrorCode::kShapeMismatch, "mask length does not match attribute count");
  }
  const LossBreakdown b = MixedLoss(output, target, layout);
  double noisy = 0.0;
  double clean = 0.0;
  for (std::size_t d = 0; d < mask.size(); ++d) (mask[d] ? noisy : clean) += b.per_attribute[d];
  return alpha * noisy + (1.0 - alpha) * clean;
}

Matrix AttributeLosses(const Matrix& output, const Matrix& target, const Layout& layout) {
  CheckShapes(output, target, layout);
  Matrix losses(output.rows(), static_cast<Eigen::Index>(layout.num_attributes()));
  for (Eigen::Index n = 0; n < output.rows(); ++n) {
    for (std::size_t d = 0; d < layout.num_attributes(); ++d) {
      const Span s = layout.spans[d];
      losses(n, static_cast<Eigen::Index>(d)) =
          SpanLoss(&output(n, static_cast<Eigen::Index>(s.start)),
                   &target(n, static_cast<Eigen::Index>(s.start)), s.width,
                   layout.categorical[d], nullptr);
    }
  }
  return losses;
}

BatchLoss WeightedBatchLoss(const Matrix& output, const Matrix& target, const Layout& layout,
                            const Matrix& weights) {
  CheckShapes(output, target, layout);
  if (weights.rows() != output.rows() ||
      static_cast<std::size_t>(weights.cols()) != layout.num_attributes()) {
    throw Error(ErrorCode::kShapeMismatch, "loss weights do not match batch");
  }
  BatchLoss res;
  res.output_grad = Matrix::Zero(output.rows(), output.cols());
  if (output.rows() == 0) return res;
  const double inv_b = 1.0 / static_cast<double>(output.rows());
  std::vector<double> grad(layout.width);
  for (Eigen::Index n = 0; n < output.rows(); ++n) {
    for (std::size_t d = 0; d < layout.num_attributes(); ++d) {
      const double w = weights(n, static_cast<Eigen::Index>(d));
      if (w == 0.0) continue;
      const Span s = layout.spans[d];
      const auto col = static_cast<Eigen::Index>(s.start);
      const double l = SpanLoss(&output(n, col), &target(n, col), s.width,
                                layout.categorical[d], grad.data());
      res.value += w * l;
      for (std::size_t c = 0; c < s.width; ++c) {
        res.output_grad(n, col + static_cast<Eigen::Index>(c)) = inv_b * w * grad[c];
      }
    }
  }
  res.value *= inv_b;
  return res;
}

BatchLoss MixedBatchLoss(const Matrix& output, const Matrix& target, const Layout& layout) {
  return WeightedBatchLoss(output, target, layout,
                           Matrix::Ones(output.rows(),
                                        static_cast<Eigen::Index>(layout.num_attributes())));
}

BatchLoss EnhancedBatchLoss(const Matrix& output, const Matrix& target, const Layout& layout,
                            const CorruptionMask& mask, double alpha) {
  if (mask.rows() != static_cast<std::size_t>(output.rows()) ||
      mask.attributes() != layout.num_attributes()) {
    throw Error(ErrorCode::kShapeMismatch, "mask does not match batch");
  }
  Matrix weights(output.rows(), static_cast<Eigen::Index>(layout.num_attributes()));
  for (Eigen::Index n = 0; n < weights.rows(); ++n) {
    for (Eigen::Index d = 0; d < weights.cols(); ++d) {
      weights(n, d) = mask.at(static_cast<std::size_t>(n), static_cast<std::size_t>(d))
                          ? alpha
                          : 1.0 - alpha;
    }
  }
  return WeightedBatchLoss(output, target, layout, weights);
}

double SampleAlpha(Rng& rng) {
  std::gamma_distribution<double> g(0.5, 1.0);
  const double x = g(rng);
  const double y = g(rng);
  if (x + y == 0.0) return 0.5;
  return x / (x + y);
}

AdamState AdamState::For(const LayerStack& stack) {
  return {Gradients::ZerosLike(stack), Gradients::ZerosLike(stack), 0};
}

void AdamStep(LayerStack& stack, const Gradients& grads, AdamState& state, double lr) {
  if (grads.weights.size() != stack.num_layers() || state.first.weights.size() != stack.num_layers()) {
    throw Error(ErrorCode::kShapeMismatch, "optimizer state does not match network");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(AdamState::kBeta1, t);
  const double c2 = 1.0 - std::pow(AdamState::kBeta2, t);
  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = AdamState::kBeta1 * m + (1.0 - AdamState::kBeta1) * g;
    v = AdamState::kBeta2 * v + (1.0 - AdamState::kBeta2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + AdamState::kEpsilon);
  };
  for (std::size_t i = 0; i < stack.num_layers(); ++i) {
    auto& layer = stack.layers()[i];
    update(layer.weights, grads.weights[i], state.first.weights[i], state.second.weights[i]);
    update(layer.bias, grads.biases[i], state.first.biases[i], state.second.biases[i]);
  }
}

double CosineLr(std::size_t epoch, std::size_t max_epochs, double base_lr) {
  if (epoch > max_epochs) {
    throw Error(ErrorCode::kPrecondition, "epoch beyond schedule horizon");
  }
  if (max_epochs == 0) return base_lr;
  const double frac = static_cast<double>(epoch) / static_cast<double>(max_epochs);
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
}

}  // namespace celldx
