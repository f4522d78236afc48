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

#include "trajcvae/perception.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace trajcvae
{

ImageFrame::ImageFrame(std::size_t h, std::size_t w, double fill)
: height(h), width(w), intensities(h * w, fill)
{
}

EnvFeature neutral_env_feature()
{
  EnvFeature f;
  f.values[static_cast<std::size_t>(SegClass::Other)] = 1.0;
  return f;
}

void validate_frame(const ImageFrame & frame)
{
  if (frame.height == 0 || frame.width == 0) {
    throw PerceptionError("image frame must have positive dimensions");
  }
  if (frame.intensities.size() != frame.height * frame.width) {
    throw PerceptionError("image frame buffer does not match its dimensions");
  }
  for (double v : frame.intensities) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw PerceptionError("image intensities must be finite and within [0, 1]");
    }
  }
}

void validate_segmentation(const SegmentationMap & seg)
{
  if (seg.height == 0 || seg.width == 0) {
    throw PerceptionError("segmentation map must have positive dimensions");
  }
  if (seg.labels.size() != seg.height * seg.width) {
    throw PerceptionError("segmentation buffer does not match its dimensions");
  }
  if (!(seg.meters_per_pixel > 0.0) || !std::isfinite(seg.meters_per_pixel)) {
    throw PerceptionError("meters_per_pixel must be positive");
  }
  for (auto label : seg.labels) {
    if (label >= kSegClassCount) {
      throw PerceptionError("segmentation label " + std::to_string(label) + " outside class set");
    }
  }
}

namespace
{

// Replicated-border pixel access.
struct Clamped
{
  const std::vector<double> & data;
  std::size_t height;
  std::size_t width;

  double operator()(std::ptrdiff_t row, std::ptrdiff_t col) const
  {
    const auto r = std::clamp<std::ptrdiff_t>(row, 0, static_cast<std::ptrdiff_t>(height) - 1);
    const auto c = std::clamp<std::ptrdiff_t>(col, 0, static_cast<std::ptrdiff_t>(width) - 1);
    return data[static_cast<std::size_t>(r) * width + static_cast<std::size_t>(c)];
  }
};

void neighbourhood_mean(
  const std::vector<double> & field, std::size_t height, std::size_t width, std::vector<double> & out)
{
  const Clamped f{field, height, width};
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const auto i = static_cast<std::ptrdiff_t>(r);
      const auto j = static_cast<std::ptrdiff_t>(c);
      out[r * width + c] =
        (f(i - 1, j) + f(i + 1, j) + f(i, j - 1) + f(i, j + 1)) / 6.0 +
        (f(i - 1, j - 1) + f(i - 1, j + 1) + f(i + 1, j - 1) + f(i + 1, j + 1)) / 12.0;
    }
  }
}

}  // namespace

FlowField horn_schunck(const ImageFrame & a, const ImageFrame & b, double alpha, int iterations)
{
  validate_frame(a);
  validate_frame(b);
  if (a.height != b.height || a.width != b.width) {
    throw PerceptionError(
      "horn_schunck: frame dimensions differ (" + std::to_string(a.height) + "x" +
      std::to_string(a.width) + " vs " + std::to_string(b.height) + "x" + std::to_string(b.width) +
      ")");
  }
  if (!(alpha > 0.0)) {
    throw PerceptionError("horn_schunck: alpha must be positive");
  }
  if (iterations < 1) {
    throw PerceptionError("horn_schunck: iterations must be positive");
  }

  const std::size_t h = a.height, w = a.width, n = h * w;
  const Clamped pa{a.intensities, h, w};
  const Clamped pb{b.intensities, h, w};
  std::vector<double> ix(n), iy(n), it(n), denom(n);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const auto i = static_cast<std::ptrdiff_t>(r);
      const auto j = static_cast<std::ptrdiff_t>(c);
      const std::size_t k = r * w + c;
      ix[k] = 0.25 * (pa(i, j + 1) - pa(i, j - 1) + pb(i, j + 1) - pb(i, j - 1));
      iy[k] = 0.25 * (pa(i + 1, j) - pa(i - 1, j) + pb(i + 1, j) - pb(i - 1, j));
      it[k] = b.intensities[k] - a.intensities[k];
      denom[k] = alpha * alpha + ix[k] * ix[k] + iy[k] * iy[k];
    }
  }

  FlowField flow{h, w, std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  std::vector<double> ubar(n), vbar(n);
  for (int iter = 0; iter < iterations; ++iter) {
    neighbourhood_mean(flow.u, h, w, ubar);
    neighbourhood_mean(flow.v, h, w, vbar);
    for (std::size_t k = 0; k < n; ++k) {
      const double t = (ix[k] * ubar[k] + iy[k] * vbar[k] + it[k]) / denom[k];
      flow.u[k] = ubar[k] - ix[k] * t;
      flow.v[k] = vbar[k] - iy[k] * t;
    }
  }
  return flow;
}

std::vector<FlowField> compute_flow_sequence(
  std::span<const ImageFrame> frames, double alpha, int iterations)
{
  if (frames.size() < 2) {
    throw PerceptionError(
      "compute_flow_sequence: need at least 2 frames, got " + std::to_string(frames.size()));
  }
  std::vector<FlowField> flows;
  flows.reserve(frames.size() - 1);
  for (std::size_t i = 0; i + 1 < frames.size(); ++i) {
    flows.push_back(horn_schunck(frames[i], frames[i + 1], alpha, iterations));
  }
  return flows;
}

EnvFeature pool_env_features(
  std::span<const FlowField> flows, const SegmentationMap & seg, const TrajectoryPoint & position,
  double radius_m)
{
  if (flows.empty()) {
    throw PerceptionError("pool_env_features: empty flow sequence");
  }
  validate_segmentation(seg);
  if (!(radius_m > 0.0)) {
    throw PerceptionError("pool_env_features: radius must be positive");
  }
  for (const auto & f : flows) {
    if (f.height != seg.height || f.width != seg.width) {
      throw PerceptionError("pool_env_features: flow and segmentation dimensions differ");
    }
  }
  if (!std::isfinite(position.x) || !std::isfinite(position.y)) {
    throw PerceptionError("pool_env_features: non-finite position");
  }

  const double mpp = seg.meters_per_pixel;
  const double px = std::clamp(position.x, 0.0, static_cast<double>(seg.width) * mpp);
  const double py = std::clamp(position.y, 0.0, static_cast<double>(seg.height) * mpp);

  // Pixel k has its centre at (k + 0.5) * mpp; keep centres within [p - r, p + r].
  auto index_range = [&](double p, std::size_t extent) {
    const double lo = std::ceil((p - radius_m) / mpp - 0.5);
    const double hi = std::floor((p + radius_m) / mpp - 0.5);
    auto first = static_cast<std::ptrdiff_t>(std::max(lo, 0.0));
    auto last = static_cast<std::ptrdiff_t>(std::min(hi, static_cast<double>(extent) - 1.0));
    if (last < first) {
      // Radius below half a pixel: fall back to the pixel under the position.
      const auto k = std::clamp<std::ptrdiff_t>(
        static_cast<std::ptrdiff_t>(std::floor(p / mpp)), 0, static_cast<std::ptrdiff_t>(extent) - 1);
      first = last = k;
    }
    return std::pair{static_cast<std::size_t>(first), static_cast<std::size_t>(last)};
  };
  const auto [c0, c1] = index_range(px, seg.width);
  const auto [r0, r1] = index_range(py, seg.height);

  std::array<std::size_t, kSegClassCount> counts{};
  for (std::size_t r = r0; r <= r1; ++r) {
    for (std::size_t c = c0; c <= c1; ++c) {
      ++counts[seg.at(r, c)];
    }
  }
  const double pixels = static_cast<double>((r1 - r0 + 1) * (c1 - c0 + 1));

  double sum_u = 0.0, sum_v = 0.0, sum_mag = 0.0, sum_mag2 = 0.0;
  for (const auto & f : flows) {
    for (std::size_t r = r0; r <= r1; ++r) {
      for (std::size_t c = c0; c <= c1; ++c) {
        const std::size_t k = r * f.width + c;
        const double mag = std::hypot(f.u[k], f.v[k]);
        sum_u += f.u[k];
        sum_v += f.v[k];
        sum_mag += mag;
        sum_mag2 += mag * mag;
      }
    }
  }
  const double samples = pixels * static_cast<double>(flows.size());

  EnvFeature feature;
  for (std::size_t k = 0; k < kSegClassCount; ++k) {
    feature.values[k] = static_cast<double>(counts[k]) / pixels;
  }
  const double mag_mean = sum_mag / samples;
  feature.values[4] = sum_u / samples;
  feature.values[5] = sum_v / samples;
  feature.values[6] = mag_mean;
  feature.values[7] = std::max(0.0, sum_mag2 / samples - mag_mean * mag_mean);
  return feature;
}

namespace
{

SegClass street_class(double x, double y)
{
  // A north-south and an east-west road crossing at the arena centre.
  const double centre = kArenaSize / 2.0;
  const double dx = std::abs(x - centre);
  const double dy = std::abs(y - centre);
  const double road = 2.0;
  const double walk = 3.5;
  if (dx <= road || dy <= road) {
    return SegClass::Road;
  }
  if (dx <= walk || dy <= walk) {
    return SegClass::Sidewalk;
  }
  if (dx >= 6.0 && dx <= 8.0 && dy >= 6.0 && dy <= 8.0) {
    return SegClass::Obstacle;
  }
  return SegClass::Other;
}

}  // namespace

SceneRendering render_scene(const Scene & scene, double meters_per_pixel)
{
  if (!(meters_per_pixel > 0.0)) {
    throw PerceptionError("render_scene: meters_per_pixel must be positive");
  }
  const auto size = static_cast<std::size_t>(std::ceil(kArenaSize / meters_per_pixel));
  SceneRendering out;
  out.seg = SegmentationMap{size, size, std::vector<std::uint8_t>(size * size), meters_per_pixel};

  ImageFrame background(size, size);
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t c = 0; c < size; ++c) {
      const double x = (static_cast<double>(c) + 0.5) * meters_per_pixel;
      const double y = (static_cast<double>(r) + 0.5) * meters_per_pixel;
      const auto cls = street_class(x, y);
      out.seg.labels[r * size + c] = static_cast<std::uint8_t>(cls);
      const double texture = 0.06 * std::sin(1.7 * x + 0.4 * y) * std::cos(1.3 * y - 0.5 * x);
      background.at(r, c) = 0.25 + 0.1 * static_cast<double>(cls) + texture;
    }
  }

  const double sigma = 0.45;
  for (std::size_t t = 0; t < scene.tau; ++t) {
    ImageFrame frame = background;
    for (const auto & track : scene.tracks) {
      const auto & p = track.points.at(t);
      for (std::size_t r = 0; r < size; ++r) {
        const double y = (static_cast<double>(r) + 0.5) * meters_per_pixel;
        const double dy2 = (y - p.y) * (y - p.y);
        if (dy2 > 9.0 * sigma * sigma * 4.0) {
          continue;
        }
        for (std::size_t c = 0; c < size; ++c) {
          const double x = (static_cast<double>(c) + 0.5) * meters_per_pixel;
          const double d2 = (x - p.x) * (x - p.x) + dy2;
          frame.at(r, c) += 0.45 * std::exp(-d2 / (2.0 * sigma * sigma));
        }
      }
    }
    for (auto & v : frame.intensities) {
      v = std::clamp(v, 0.0, 1.0);
    }
    out.frames.push_back(std::move(frame));
  }
  return out;
}

}  // namespace trajcvae
