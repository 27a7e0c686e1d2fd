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

#ifndef CELLDX_SYNTHETIC_H_
#define CELLDX_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>

#include "celldx/table.h"

namespace celldx {

// Mixed-type table driven by a low-dimensional Gaussian latent factor:
// numerics are noisy linear read-outs, categoricals are the argmax of noisy
// linear scores. Every attribute is predictable from the others, which is
// what a denoiser needs to localize injected errors.
struct SyntheticSpec {
  std::size_t rows = 5000;
  std::size_t categorical = 5;
  std::size_t categories = 4;
  std::size_t numeric = 5;
  std::size_t latent_dim = 3;
  double numeric_noise = 0.1;    // relative to the signal scale
  double category_noise = 0.15;  // Gumbel temperature on category scores
  std::uint64_t seed = 0;
};

RawTable GenerateSynthetic(const SyntheticSpec& spec);

}  // namespace celldx

#endif  // CELLDX_SYNTHETIC_H_
