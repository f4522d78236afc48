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

#ifndef TRAJCVAE__SVG_PLOT_HPP_
#define TRAJCVAE__SVG_PLOT_HPP_

#include "trajcvae/metrics.hpp"
#include "trajcvae/scene.hpp"

#include <span>
#include <string>

namespace trajcvae
{

struct PlotOptions
{
  double pixels_per_meter = 30.0;
  double margin_m = 1.0;
};

/**
 * @brief Static SVG of one scene and its sampled futures.
 *
 * Target past solid, ground-truth future dashed, samples translucent,
 * other agents' pasts thin grey. World y grows downward, matching the image
 * convention. Gridlines every meter (coarser for large extents). Output is a
 * pure function of the inputs.
 */
std::string render_svg(
  const Scene & scene, std::span<const Trajectory> samples, const PlotOptions & options = {});

}  // namespace trajcvae

#endif  // TRAJCVAE__SVG_PLOT_HPP_
