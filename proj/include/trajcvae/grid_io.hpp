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

#ifndef TRAJCVAE__GRID_IO_HPP_
#define TRAJCVAE__GRID_IO_HPP_

#include "trajcvae/perception.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace trajcvae
{

/// Malformed or unreadable grid file. The message carries the path.
class FormatError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Portable grey-map files. Both P2 (text) and P5 (binary, 8- or 16-bit
// big-endian samples) are read; frames are written as P5 with maxval 65535.
ImageFrame read_frame_pgm(const std::filesystem::path & path);
void write_frame_pgm(const std::filesystem::path & path, const ImageFrame & frame);

// Segmentation maps are P2 with maxval 3 and a "# meters_per_pixel <value>" comment.
SegmentationMap read_segmentation_pgm(const std::filesystem::path & path);
void write_segmentation_pgm(const std::filesystem::path & path, const SegmentationMap & seg);

/**
 * Flow fields: 8-byte magic "FLOWGRID", uint32 LE height, uint32 LE width,
 * then the u grid and the v grid as float64 LE, row-major.
 */
void write_flow(std::ostream & out, const FlowField & flow);
FlowField read_flow(std::istream & in);
void write_flow_file(const std::filesystem::path & path, const FlowField & flow);
FlowField read_flow_file(const std::filesystem::path & path);

}  // namespace trajcvae

#endif  // TRAJCVAE__GRID_IO_HPP_
