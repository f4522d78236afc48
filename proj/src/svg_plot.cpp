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

#include "trajcvae/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace trajcvae
{

namespace
{

std::string num(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  // Avoid "-0.00".
  return std::string(buf) == "-0.00" ? "0.00" : buf;
}

struct Frame
{
  double min_x, min_y, max_x, max_y, scale;

  double px(double x) const { return (x - min_x) * scale; }
  double py(double y) const { return (y - min_y) * scale; }
  double width() const { return (max_x - min_x) * scale; }
  double height() const { return (max_y - min_y) * scale; }
};

std::string polyline(
  const Frame & f, const std::vector<TrajectoryPoint> & points, const std::string & style)
{
  std::string out = "<polyline fill=\"none\" " + style + " points=\"";
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i > 0) {
      out += ' ';
    }
    out += num(f.px(points[i].x)) + "," + num(f.py(points[i].y));
  }
  out += "\"/>\n";
  return out;
}

}  // namespace

std::string render_svg(
  const Scene & scene, std::span<const Trajectory> samples, const PlotOptions & options)
{
  validate_scene(scene);
  if (!(options.pixels_per_meter > 0.0) || !(options.margin_m >= 0.0)) {
    throw std::invalid_argument("render_svg: bad plot options");
  }
  const auto [past, future] = split_target(scene);

  double min_x = std::numeric_limits<double>::infinity();
  double min_y = min_x;
  double max_x = -min_x;
  double max_y = -min_x;
  auto extend = [&](const TrajectoryPoint & p) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  };
  for (const auto & t : scene.tracks) {
    std::for_each(t.points.begin(), t.points.end(), extend);
  }
  for (const auto & s : samples) {
    for (const auto & p : s) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw std::invalid_argument("render_svg: non-finite sample point");
      }
      extend(p);
    }
  }
  Frame f{std::floor(min_x - options.margin_m), std::floor(min_y - options.margin_m),
    std::ceil(max_x + options.margin_m), std::ceil(max_y + options.margin_m),
    options.pixels_per_meter};

  const double extent = std::max(f.max_x - f.min_x, f.max_y - f.min_y);
  double step = 1.0;
  while (extent / step > 40.0) {
    step *= 5.0;
  }

  const double legend_h = 80.0;
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(f.width()) + "\" height=\"" +
    num(f.height() + legend_h) + "\" viewBox=\"0 0 " + num(f.width()) + " " +
    num(f.height() + legend_h) + "\">\n";
  out += "<title>scene " + std::to_string(scene.scene_id) + "</title>\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + num(f.width()) + "\" height=\"" +
    num(f.height() + legend_h) + "\" fill=\"white\"/>\n";

  out += "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  for (double x = std::ceil(f.min_x / step) * step; x <= f.max_x + 1e-9; x += step) {
    out += "<line x1=\"" + num(f.px(x)) + "\" y1=\"0.00\" x2=\"" + num(f.px(x)) + "\" y2=\"" +
      num(f.height()) + "\"/>\n";
  }
  for (double y = std::ceil(f.min_y / step) * step; y <= f.max_y + 1e-9; y += step) {
    out += "<line x1=\"0.00\" y1=\"" + num(f.py(y)) + "\" x2=\"" + num(f.width()) + "\" y2=\"" +
      num(f.py(y)) + "\"/>\n";
  }
  out += "</g>\n";

  for (std::size_t i = 0; i < scene.tracks.size(); ++i) {
    if (i == scene.target_index) {
      continue;
    }
    const auto & pts = scene.tracks[i].points;
    out += polyline(
      f, {pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(scene.tau)},
      "stroke=\"#888888\" stroke-width=\"1.5\"");
  }
  for (const auto & s : samples) {
    std::vector<TrajectoryPoint> pts{past.last()};
    pts.insert(pts.end(), s.begin(), s.end());
    out += polyline(f, pts, "stroke=\"#e4572e\" stroke-width=\"2\" stroke-opacity=\"0.35\"");
  }
  std::vector<TrajectoryPoint> truth{past.last()};
  truth.insert(truth.end(), future.points.begin(), future.points.end());
  out += polyline(f, truth, "stroke=\"#2a9d8f\" stroke-width=\"2.5\" stroke-dasharray=\"6 4\"");
  out += polyline(f, past.points, "stroke=\"#1d3557\" stroke-width=\"3\"");

  const double ly = f.height() + 15.0;
  auto legend = [&](double y, const std::string & style, const std::string & label) {
    return "<line x1=\"10.00\" y1=\"" + num(y) + "\" x2=\"40.00\" y2=\"" + num(y) + "\" " + style +
           "/>\n<text x=\"48.00\" y=\"" + num(y + 4.0) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + label + "</text>\n";
  };
  out += "<g>\n";
  out += legend(ly, "stroke=\"#1d3557\" stroke-width=\"3\"", "observed past");
  out += legend(ly + 18.0, "stroke=\"#2a9d8f\" stroke-width=\"2.5\" stroke-dasharray=\"6 4\"",
    "ground-truth future");
  out += legend(ly + 36.0, "stroke=\"#e4572e\" stroke-width=\"2\" stroke-opacity=\"0.35\"",
    "sampled futures (" + std::to_string(samples.size()) + ")");
  out += "<text x=\"10.00\" y=\"" + num(ly + 58.0) +
    "\" font-family=\"sans-serif\" font-size=\"11\">grid " + num(step) + " m</text>\n";
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace trajcvae
