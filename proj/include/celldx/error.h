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

#ifndef CELLDX_ERROR_H_
#define CELLDX_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace celldx {

enum class ErrorCode {
  kEmptyTable,
  kMixedColumn,
  kConstantColumn,
  kTypoExhausted,
  kInvalidArchitecture,
  kShapeMismatch,
  kDivergence,
  kRankDeficient,
  kEmDegenerate,
  kUnsupportedModelKind,
  kNoPositives,
  kDatasetMissing,
  kSchemaMismatch,
  kPrecondition,
  kIo,
  kParse,
};

std::string_view ErrorCodeName(ErrorCode code);

// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace celldx

#endif  // CELLDX_ERROR_H_
