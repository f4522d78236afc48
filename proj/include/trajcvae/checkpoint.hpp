// Copyright 2026 The trajcvae Authors
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

#ifndef TRAJCVAE__CHECKPOINT_HPP_
#define TRAJCVAE__CHECKPOINT_HPP_

#include "trajcvae/model.hpp"
#include "trajcvae/nn.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace trajcvae
{

class CheckpointError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

constexpr std::uint32_t kCheckpointVersion = 1;

/**
 * Layout (little-endian):
 *   "TRJCKPT\0"  u32 version  u64 payload_size  payload  u32 crc32(payload)
 * payload:
 *   str model_config  str run_config  u32 tensor_count
 *   per tensor: str name  u32 rows  u32 cols  f64[rows * cols] row-major
 * where str is a u32 length followed by the bytes.
 */
struct Checkpoint
{
  ModelConfig model;
  /// Snapshot of the run configuration text, informational only.
  std::string run_config;
  ParameterSet params;
};

std::string encode_checkpoint(const Checkpoint & checkpoint);

/// Verifies magic, version and checksum, then that the tensors fit the model.
Checkpoint decode_checkpoint(std::string_view bytes, std::string_view context = "checkpoint");

void save_checkpoint(const std::filesystem::path & path, const Checkpoint & checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path & path);

}  // namespace trajcvae

#endif  // TRAJCVAE__CHECKPOINT_HPP_
