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

#include "trajcvae/checkpoint.hpp"

#include "byte_io.hpp"
#include "trajcvae/run_config.hpp"
#include "trajcvae/scene_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <limits>

namespace trajcvae
{

namespace
{

constexpr std::string_view kMagic{"TRJCKPT\0", 8};

std::uint32_t checksum(std::string_view bytes)
{
  uLong crc = crc32(0L, Z_NULL, 0);
  // crc32 takes a uInt length; feed large payloads in chunks.
  while (!bytes.empty()) {
    const auto n = static_cast<uInt>(std::min<std::size_t>(bytes.size(), 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef *>(bytes.data()), n);
    bytes.remove_prefix(n);
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::string encode_checkpoint(const Checkpoint & checkpoint)
{
  check_model(checkpoint.model, checkpoint.params);
  std::string payload;
  detail::put_string(payload, model_config_text(checkpoint.model));
  detail::put_string(payload, checkpoint.run_config);
  detail::put_u32(payload, static_cast<std::uint32_t>(checkpoint.params.size()));
  for (const auto & e : checkpoint.params.entries()) {
    detail::put_string(payload, e.name);
    detail::put_u32(payload, static_cast<std::uint32_t>(e.tensor.rows()));
    detail::put_u32(payload, static_cast<std::uint32_t>(e.tensor.cols()));
    for (double v : e.tensor.values()) {
      detail::put_f64(payload, v);
    }
  }

  std::string out(kMagic);
  detail::put_u32(out, kCheckpointVersion);
  detail::put_u64(out, payload.size());
  out += payload;
  detail::put_u32(out, checksum(payload));
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes, std::string_view context)
{
  const std::string ctx(context);
  try {
    detail::ByteReader header(bytes, ctx);
    if (header.take(kMagic.size()) != kMagic) {
      throw CheckpointError(ctx + ": not a checkpoint (bad magic)");
    }
    const auto version = header.u32();
    if (version != kCheckpointVersion) {
      throw CheckpointError(
        ctx + ": unsupported checkpoint version " + std::to_string(version));
    }
    const auto size = header.u64();
    if (size > header.remaining() || header.remaining() - size != 4) {
      throw CheckpointError(ctx + ": truncated or oversized checkpoint");
    }
    const auto payload = header.take(static_cast<std::size_t>(size));
    const auto stored = header.u32();
    const auto actual = checksum(payload);
    if (stored != actual) {
      throw CheckpointError(ctx + ": checksum mismatch, refusing to load");
    }

    detail::ByteReader in(payload, ctx);
    Checkpoint cp;
    try {
      cp.model = parse_model_config(in.string());
    } catch (const std::invalid_argument & e) {
      throw CheckpointError(ctx + ": bad model config: " + e.what());
    }
    cp.run_config = in.string();
    const auto count = in.u32();
    for (std::uint32_t t = 0; t < count; ++t) {
      auto name = in.string();
      const auto rows = in.u32();
      const auto cols = in.u32();
      const auto n = static_cast<std::uint64_t>(rows) * cols;
      if (n * 8 > in.remaining()) {
        throw CheckpointError(ctx + ": tensor '" + name + "' exceeds the payload");
      }
      auto tensor = ad::Tensor::zeros({rows, cols});
      for (auto & v : tensor.values()) {
        v = in.f64();
      }
      cp.params.add(std::move(name), std::move(tensor));
    }
    if (in.remaining() != 0) {
      throw CheckpointError(ctx + ": trailing bytes in payload");
    }
    try {
      check_model(cp.model, cp.params);
    } catch (const std::invalid_argument & e) {
      throw CheckpointError(ctx + ": parameters do not match the model config: " + e.what());
    }
    return cp;
  } catch (const CheckpointError &) {
    throw;
  } catch (const std::runtime_error & e) {
    throw CheckpointError(e.what());
  }
}

void save_checkpoint(const std::filesystem::path & path, const Checkpoint & checkpoint)
{
  write_text_file(path, encode_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path & path)
{
  std::string bytes;
  try {
    bytes = read_text_file(path);
  } catch (const FormatError & e) {
    throw CheckpointError(e.what());
  }
  return decode_checkpoint(bytes, path.string());
}

}  // namespace trajcvae
