// Copyright 2026 The viewflow Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "viewflow/model_config.hpp"
#include "viewflow/params.hpp"

namespace viewflow {

// Versioned binary checkpoint, little-endian:
//
//   char[4]  magic "VFCK"
//   u32      format version (1)
//   u32      A, P, D
//   u32      ablation flag bits (instant, constant, gate, instruct_u,
//            summaries from bit 0)
//   u64      trainable parameter count
//   u32+     metadata JSON (model config and run info), length-prefixed
//   u32      tensor count, then tensors as float32 with shape prefixes
struct Checkpoint {
  ModelConfig config;
  ModelParams params;
  nlohmann::json metadata = nlohmann::json::object();
  // First 16 hex digits of the SHA-256 of the serialized bytes. Filled by
  // serialize() and load.
  std::string version;
};

struct CheckpointHeader {
  std::uint32_t format_version = 0;
  std::uint32_t attr_dim = 0;
  std::uint32_t proj_dim = 0;
  std::uint32_t article_dim = 0;
  std::uint32_t flag_bits = 0;
  std::uint64_t parameter_count = 0;
};

constexpr std::uint32_t kCheckpointFormatVersion = 1;

std::uint32_t flag_bits(const AblationFlags& flags);

// Serializes and sets checkpoint.version.
std::string serialize_checkpoint(Checkpoint& checkpoint);
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const std::string& path, Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);
CheckpointHeader read_checkpoint_header(const std::string& path);

// Rounds every tensor through float32, matching what a save/load cycle
// produces.
void round_to_storage_precision(ModelParams& params);

}  // namespace viewflow
