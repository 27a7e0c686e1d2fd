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

#include "celldx/error.h"

namespace celldx {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyTable: return "EmptyTable";
    case ErrorCode::kMixedColumn: return "MixedColumn";
    case ErrorCode::kConstantColumn: return "ConstantColumn";
    case ErrorCode::kTypoExhausted: return "TypoExhausted";
    case ErrorCode::kInvalidArchitecture: return "InvalidArchitecture";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kDivergence: return "Divergence";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kEmDegenerate: return "EMDegenerate";
    case ErrorCode::kUnsupportedModelKind: return "UnsupportedModelKind";
    case ErrorCode::kNoPositives: return "NoPositives";
    case ErrorCode::kDatasetMissing: return "DatasetMissing";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kPrecondition: return "Precondition";
    case ErrorCode::kIo: return "IO";
    case ErrorCode::kParse: return "Parse";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code) {}

}  // namespace celldx
