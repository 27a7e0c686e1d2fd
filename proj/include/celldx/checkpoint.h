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

#ifndef CELLDX_CHECKPOINT_H_
#define CELLDX_CHECKPOINT_H_

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "celldx/models.h"

namespace celldx {

inline constexpr int kCheckpointVersion = 1;

// JSON container: kind tag, schema, training provenance and a parameter
// block. Real-valued parameters are stored as hex strings of little-endian
// IEEE-754 doubles so a load reproduces inference bit-exactly.
nlohmann::json CheckpointToJson(const TrainedModel& model);
TrainedModel CheckpointFromJson(const nlohmann::json& doc);

void SaveCheckpoint(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel LoadCheckpoint(const std::filesystem::path& path);

std::string EncodeDoubles(std::span<const double> values);
std::vector<double> DecodeDoubles(std::string_view hex);

nlohmann::json TrainConfigToJson(const TrainConfig& config);
TrainConfig TrainConfigFromJson(const nlohmann::json& doc);
nlohmann::json CorruptionConfigToJson(const CorruptionConfig& config);
CorruptionConfig CorruptionConfigFromJson(const nlohmann::json& doc);

}  // namespace celldx

#endif  // CELLDX_CHECKPOINT_H_
