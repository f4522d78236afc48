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

#ifndef TRAJCVAE__PERCEPTION_HPP_
#define TRAJCVAE__PERCEPTION_HPP_

#include "trajcvae/scene.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace trajcvae
{

class PerceptionError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Grey-level image, row-major, intensities in [0, 1].
struct ImageFrame
{
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> intensities;

  ImageFrame() = default;
  ImageFrame(std::size_t h, std::size_t w, double fill = 0.0);

  double at(std::size_t row, std::size_t col) const { return intensities[row * width + col]; }
  double & at(std::size_t row, std::size_t col) { return intensities[row * width + col]; }

  friend bool operator==(const ImageFrame &, const ImageFrame &) = default;
};

/// Per-pixel displacement in pixels/frame; u along columns, v along rows.
struct FlowField
{
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> u;
  std::vector<double> v;

  friend bool operator==(const FlowField &, const FlowField &) = default;
};

enum class SegClass : std::uint8_t { Road = 0, Sidewalk = 1, Obstacle = 2, Other = 3 };

constexpr std::size_t kSegClassCount = 4;

/**
 * @brief Static per-pixel class labels.
 *
 * Pixel (row, col) covers world [col, col+1) x [row, row+1) scaled by
 * meters_per_pixel: the origin is the image's top-left corner and world y
 * grows with the row index.
 */
struct SegmentationMap
{
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> labels;
  double meters_per_pixel = 0.25;

  std::uint8_t at(std::size_t row, std::size_t col) const { return labels[row * width + col]; }

  friend bool operator==(const SegmentationMap &, const SegmentationMap &) = default;
};

constexpr std::size_t kEnvFeatureDim = 8;

/// Layout: occupancy[road, sidewalk, obstacle, other], mean u, mean v, |flow| mean, |flow| variance.
struct EnvFeature
{
  std::array<double, kEnvFeatureDim> values{};

  std::span<const double> occupancy() const { return std::span(values).first(kSegClassCount); }

  friend bool operator==(const EnvFeature &, const EnvFeature &) = default;
};

/// Feature used when a scene carries no visual inputs: all "other", no motion.
EnvFeature neutral_env_feature();

void validate_frame(const ImageFrame & frame);
void validate_segmentation(const SegmentationMap & seg);

/**
 * @brief Dense Horn–Schunck optical flow from `a` to `b`.
 *
 * Spatial derivatives are central differences averaged over both frames and
 * the temporal derivative is b - a; borders replicate the edge pixel. Starting
 * from zero flow, each of `iterations` Jacobi sweeps sets
 *   u = ubar - Ix (Ix ubar + Iy vbar + It) / (alpha^2 + Ix^2 + Iy^2)
 * (and likewise for v), with ubar the 1/6-1/12 weighted neighbourhood mean.
 */
FlowField horn_schunck(const ImageFrame & a, const ImageFrame & b, double alpha, int iterations);

/// One field per consecutive pair, in frame order.
std::vector<FlowField> compute_flow_sequence(
  std::span<const ImageFrame> frames, double alpha, int iterations);

/**
 * @brief Pools segmentation occupancy and flow statistics around a world position.
 *
 * The window holds every pixel whose centre lies within radius_m (per axis)
 * of the position, after clamping the position into the image extent. Flow
 * statistics are averaged over the window and over all fields.
 */
EnvFeature pool_env_features(
  std::span<const FlowField> flows, const SegmentationMap & seg, const TrajectoryPoint & position,
  double radius_m);

/// Frames and segmentation synthesised for a scene's observed steps.
struct SceneRendering
{
  std::vector<ImageFrame> frames;
  SegmentationMap seg;
};

/**
 * @brief Renders a textured street layout with agents as Gaussian blobs.
 *
 * Produces one frame per observed step (tau frames) covering the synthetic
 * arena at the given resolution. Deterministic.
 */
SceneRendering render_scene(const Scene & scene, double meters_per_pixel);

}  // namespace trajcvae

#endif  // TRAJCVAE__PERCEPTION_HPP_
