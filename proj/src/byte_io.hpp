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

// Little-endian primitives shared by the binary formats.

#ifndef TRAJCVAE__BYTE_IO_HPP_
#define TRAJCVAE__BYTE_IO_HPP_

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace trajcvae::detail
{

inline void put_u32(std::string & out, std::uint32_t v)
{
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
  }
}

inline void put_u64(std::string & out, std::uint64_t v)
{
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
  }
}

inline void put_f64(std::string & out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline void put_string(std::string & out, std::string_view s)
{
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

/// Bounds-checked cursor over a byte buffer.
class ByteReader
{
public:
  ByteReader(std::string_view data, std::string context) : data_(data), context_(std::move(context))
  {
  }

  std::string_view take(std::size_t n)
  {
    if (n > data_.size() - pos_) {
      throw std::runtime_error(context_ + ": unexpected end of data");
    }
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::uint32_t u32()
  {
    const auto s = take(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) {
      v = (v << 8) | static_cast<std::uint8_t>(s[static_cast<std::size_t>(i)]);
    }
    return v;
  }

  std::uint64_t u64()
  {
    const auto s = take(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
      v = (v << 8) | static_cast<std::uint8_t>(s[static_cast<std::size_t>(i)]);
    }
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  std::string string() { return std::string(take(u32())); }

  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t position() const { return pos_; }

private:
  std::string_view data_;
  std::string context_;
  std::size_t pos_ = 0;
};

}  // namespace trajcvae::detail

#endif  // TRAJCVAE__BYTE_IO_HPP_
