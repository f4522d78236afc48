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

#include "trajcvae/grid_io.hpp"

#include "byte_io.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

namespace trajcvae
{

namespace
{

constexpr std::string_view kFlowMagic = "FLOWGRID";

std::string read_all(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open '" + path.string() + "' for reading");
  }
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_all(const std::filesystem::path & path, const std::string & bytes)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw FormatError("cannot open '" + path.string() + "' for writing");
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw FormatError("write failed for '" + path.string() + "'");
  }
}

struct Pgm
{
  std::size_t width = 0;
  std::size_t height = 0;
  unsigned maxval = 0;
  std::vector<unsigned> samples;
  std::vector<std::string> comments;
};

// Header tokenizer that skips whitespace and collects '#' comments.
class HeaderReader
{
public:
  HeaderReader(const std::string & data, std::string context) : data_(data), context_(std::move(context)) {}

  std::string token()
  {
    skip();
    const std::size_t start = pos_;
    while (pos_ < data_.size() && !std::isspace(static_cast<unsigned char>(data_[pos_])) &&
      data_[pos_] != '#')
    {
      ++pos_;
    }
    if (start == pos_) {
      throw FormatError(context_ + ": truncated header");
    }
    return data_.substr(start, pos_ - start);
  }

  unsigned number()
  {
    const auto t = token();
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(t, &used);
      if (used != t.size() || v > std::numeric_limits<unsigned>::max()) {
        throw std::invalid_argument(t);
      }
      return static_cast<unsigned>(v);
    } catch (const std::exception &) {
      throw FormatError(context_ + ": expected a number, found '" + t + "'");
    }
  }

  // Exactly one whitespace byte separates the header from binary samples.
  std::size_t binary_start()
  {
    if (pos_ >= data_.size()) {
      throw FormatError(context_ + ": missing sample data");
    }
    return pos_ + 1;
  }

  const std::vector<std::string> & comments() const { return comments_; }

private:
  void skip()
  {
    while (pos_ < data_.size()) {
      const char ch = data_[pos_];
      if (ch == '#') {
        const auto end = data_.find('\n', pos_);
        comments_.push_back(data_.substr(pos_ + 1, (end == std::string::npos ? data_.size() : end) - pos_ - 1));
        pos_ = end == std::string::npos ? data_.size() : end + 1;
      } else if (std::isspace(static_cast<unsigned char>(ch))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string & data_;
  std::string context_;
  std::size_t pos_ = 0;
  std::vector<std::string> comments_;
};

Pgm read_pgm(const std::filesystem::path & path)
{
  const std::string data = read_all(path);
  const std::string ctx = "'" + path.string() + "'";
  HeaderReader header(data, ctx);
  const std::string magic = header.token();
  if (magic != "P2" && magic != "P5") {
    throw FormatError(ctx + ": not a grey-map file (magic '" + magic + "')");
  }
  Pgm pgm;
  pgm.width = header.number();
  pgm.height = header.number();
  pgm.maxval = header.number();
  if (pgm.width == 0 || pgm.height == 0 || pgm.maxval == 0 || pgm.maxval > 65535) {
    throw FormatError(ctx + ": invalid dimensions or maxval");
  }
  const std::size_t n = pgm.width * pgm.height;
  pgm.samples.resize(n);
  if (magic == "P2") {
    for (auto & s : pgm.samples) {
      s = header.number();
    }
  } else {
    const std::size_t start = header.binary_start();
    const std::size_t bytes = pgm.maxval > 255 ? 2 : 1;
    if (data.size() < start + n * bytes) {
      throw FormatError(ctx + ": truncated sample data");
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto * p = reinterpret_cast<const unsigned char *>(data.data() + start + i * bytes);
      pgm.samples[i] = bytes == 2 ? (static_cast<unsigned>(p[0]) << 8) | p[1] : p[0];
    }
  }
  for (auto s : pgm.samples) {
    if (s > pgm.maxval) {
      throw FormatError(ctx + ": sample exceeds maxval");
    }
  }
  pgm.comments = header.comments();
  return pgm;
}

}  // namespace

ImageFrame read_frame_pgm(const std::filesystem::path & path)
{
  const auto pgm = read_pgm(path);
  ImageFrame frame(pgm.height, pgm.width);
  for (std::size_t i = 0; i < pgm.samples.size(); ++i) {
    frame.intensities[i] = static_cast<double>(pgm.samples[i]) / static_cast<double>(pgm.maxval);
  }
  return frame;
}

void write_frame_pgm(const std::filesystem::path & path, const ImageFrame & frame)
{
  validate_frame(frame);
  std::string out = "P5\n" + std::to_string(frame.width) + " " + std::to_string(frame.height) +
    "\n65535\n";
  for (double v : frame.intensities) {
    const auto s = static_cast<unsigned>(std::lround(v * 65535.0));
    out.push_back(static_cast<char>((s >> 8) & 0xFF));
    out.push_back(static_cast<char>(s & 0xFF));
  }
  write_all(path, out);
}

SegmentationMap read_segmentation_pgm(const std::filesystem::path & path)
{
  const auto pgm = read_pgm(path);
  SegmentationMap seg;
  seg.height = pgm.height;
  seg.width = pgm.width;
  seg.labels.resize(pgm.samples.size());
  for (std::size_t i = 0; i < pgm.samples.size(); ++i) {
    if (pgm.samples[i] >= kSegClassCount) {
      throw FormatError("'" + path.string() + "': label " + std::to_string(pgm.samples[i]) +
        " outside class set");
    }
    seg.labels[i] = static_cast<std::uint8_t>(pgm.samples[i]);
  }
  bool found = false;
  for (const auto & c : pgm.comments) {
    std::istringstream is(c);
    std::string key;
    double value = 0.0;
    if (is >> key >> value && key == "meters_per_pixel") {
      seg.meters_per_pixel = value;
      found = true;
    }
  }
  if (!found) {
    throw FormatError("'" + path.string() + "': missing '# meters_per_pixel' comment");
  }
  validate_segmentation(seg);
  return seg;
}

void write_segmentation_pgm(const std::filesystem::path & path, const SegmentationMap & seg)
{
  validate_segmentation(seg);
  std::ostringstream os;
  os.precision(17);
  os << "P2\n# meters_per_pixel " << seg.meters_per_pixel << "\n"
     << seg.width << " " << seg.height << "\n3\n";
  for (std::size_t r = 0; r < seg.height; ++r) {
    for (std::size_t c = 0; c < seg.width; ++c) {
      os << (c ? " " : "") << static_cast<unsigned>(seg.at(r, c));
    }
    os << "\n";
  }
  write_all(path, os.str());
}

void write_flow(std::ostream & out, const FlowField & flow)
{
  const std::size_t n = flow.height * flow.width;
  if (flow.u.size() != n || flow.v.size() != n) {
    throw FormatError("flow field buffers do not match its dimensions");
  }
  if (flow.height > std::numeric_limits<std::uint32_t>::max() ||
    flow.width > std::numeric_limits<std::uint32_t>::max())
  {
    throw FormatError("flow field too large for the FLOWGRID layout");
  }
  std::string bytes(kFlowMagic);
  detail::put_u32(bytes, static_cast<std::uint32_t>(flow.height));
  detail::put_u32(bytes, static_cast<std::uint32_t>(flow.width));
  for (double v : flow.u) {
    detail::put_f64(bytes, v);
  }
  for (double v : flow.v) {
    detail::put_f64(bytes, v);
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

FlowField read_flow(std::istream & in)
{
  const std::string data(std::istreambuf_iterator<char>(in), {});
  detail::ByteReader reader(data, "flow grid");
  try {
    if (reader.take(kFlowMagic.size()) != kFlowMagic) {
      throw FormatError("flow grid: bad magic");
    }
    FlowField flow;
    flow.height = reader.u32();
    flow.width = reader.u32();
    const std::size_t n = flow.height * flow.width;
    if (reader.remaining() != 16 * n) {
      throw FormatError("flow grid: payload size does not match dimensions");
    }
    flow.u.resize(n);
    flow.v.resize(n);
    for (auto & v : flow.u) {
      v = reader.f64();
    }
    for (auto & v : flow.v) {
      v = reader.f64();
    }
    return flow;
  } catch (const FormatError &) {
    throw;
  } catch (const std::runtime_error & e) {
    throw FormatError(e.what());
  }
}

void write_flow_file(const std::filesystem::path & path, const FlowField & flow)
{
  std::ostringstream os;
  write_flow(os, flow);
  write_all(path, os.str());
}

FlowField read_flow_file(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open '" + path.string() + "' for reading");
  }
  try {
    return read_flow(in);
  } catch (const FormatError & e) {
    throw FormatError("'" + path.string() + "': " + e.what());
  }
}

}  // namespace trajcvae
