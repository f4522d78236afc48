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

#include "support.hpp"

#include "trajcvae/grid_io.hpp"
#include "trajcvae/perception.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

using namespace trajcvae;

namespace
{

// Smooth periodic texture with period 16 px along both axes.
double texture(double row, double col)
{
  const double k = 2.0 * std::numbers::pi / 16.0;
  return 0.5 + 0.2 * std::sin(k * col) + 0.15 * std::cos(k * row) + 0.1 * std::sin(k * (row + col));
}

ImageFrame textured(std::size_t h, std::size_t w, double shift_cols)
{
  ImageFrame f(h, w);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      f.at(r, c) = texture(static_cast<double>(r), static_cast<double>(c) - shift_cols);
    }
  }
  return f;
}

double mean(const std::vector<double> & v)
{
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

SegmentationMap split_map(std::size_t size, std::size_t boundary_col)
{
  SegmentationMap seg;
  seg.height = size;
  seg.width = size;
  seg.meters_per_pixel = 0.25;
  seg.labels.resize(size * size);
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t c = 0; c < size; ++c) {
      seg.labels[r * size + c] = static_cast<std::uint8_t>(c < boundary_col ? SegClass::Road :
                                                                              SegClass::Sidewalk);
    }
  }
  return seg;
}

FlowField zero_flow(std::size_t h, std::size_t w)
{
  return FlowField{h, w, std::vector<double>(h * w, 0.0), std::vector<double>(h * w, 0.0)};
}

}  // namespace

TEST_CASE("identical frames give exactly zero flow at any intensity scale")
{
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double scale : {1.0, 0.5, 0.01}) {
    ImageFrame f(12, 9);
    for (auto & v : f.intensities) {
      v = scale * u(rng);
    }
    const auto flow = horn_schunck(f, f, 0.1, 50);
    CHECK(flow.height == 12);
    CHECK(flow.width == 9);
    for (std::size_t i = 0; i < flow.u.size(); ++i) {
      CHECK(flow.u[i] == 0.0);
      CHECK(flow.v[i] == 0.0);
    }
  }
}

TEST_CASE("constant frames give zero flow")
{
  const auto flow = horn_schunck(ImageFrame(6, 6, 0.2), ImageFrame(6, 6, 0.7), 0.1, 20);
  for (std::size_t i = 0; i < flow.u.size(); ++i) {
    CHECK(flow.u[i] == 0.0);
    CHECK(flow.v[i] == 0.0);
  }
}

TEST_CASE("one pixel translation is recovered")
{
  const auto a = textured(64, 64, 0.0);
  const auto b = textured(64, 64, 1.0);
  const auto flow = horn_schunck(a, b, 0.1, 200);
  CHECK(std::abs(mean(flow.u) - 1.0) < 0.2);
  CHECK(std::abs(mean(flow.v)) < 0.2);
}

TEST_CASE("horn_schunck input checks")
{
  CHECK_THROWS_AS(horn_schunck(ImageFrame(4, 4), ImageFrame(4, 5), 0.1, 10), PerceptionError);
  CHECK_THROWS_AS(horn_schunck(ImageFrame(4, 4), ImageFrame(4, 4), 0.0, 10), PerceptionError);
  CHECK_THROWS_AS(horn_schunck(ImageFrame(4, 4), ImageFrame(4, 4), 0.1, 0), PerceptionError);
}

TEST_CASE("flow sequence")
{
  std::vector<ImageFrame> frames;
  for (int i = 0; i < 8; ++i) {
    frames.push_back(textured(16, 16, 0.25 * i));
  }
  const auto flows = compute_flow_sequence(frames, 0.1, 30);
  REQUIRE(flows.size() == 7);
  // Field i comes from frames i and i+1.
  CHECK(flows[3] == horn_schunck(frames[3], frames[4], 0.1, 30));

  const std::vector<ImageFrame> same{frames[0], frames[0]};
  const auto one = compute_flow_sequence(same, 0.1, 30);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == zero_flow(16, 16));

  const std::vector<ImageFrame> three{frames[0], textured(16, 16, 2.0), frames[0]};
  const auto pair = compute_flow_sequence(three, 0.1, 30);
  REQUIRE(pair.size() == 2);
  CHECK(pair[0] != pair[1]);
  CHECK(mean(pair[0].u) * mean(pair[1].u) < 0.0);

  CHECK_THROWS_AS(compute_flow_sequence(std::span(frames).first(1), 0.1, 30), PerceptionError);
}

TEST_CASE("flow sequence length is always one less than the frame count")
{
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = test::random_size(rng, 2, 9);
    const auto h = test::random_size(rng, 1, 6);
    const auto w = test::random_size(rng, 1, 6);
    std::vector<ImageFrame> frames(n, ImageFrame(h, w));
    for (auto & f : frames) {
      for (auto & v : f.intensities) {
        v = u(rng);
      }
    }
    CHECK(compute_flow_sequence(frames, 0.5, 3).size() == n - 1);
  }
}

TEST_CASE("pooling over a uniform road window")
{
  const auto seg = split_map(40, 40);
  const std::vector<FlowField> flows{zero_flow(40, 40), zero_flow(40, 40)};
  const auto f = pool_env_features(flows, seg, {5.0, 5.0}, 2.0);
  const EnvFeature expect{{1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0}};
  CHECK(f == expect);
}

TEST_CASE("pooling across a straight road/sidewalk boundary")
{
  // Boundary at column 20, i.e. x = 5 m. Count window pixels directly.
  const auto seg = split_map(40, 20);
  const TrajectoryPoint at{5.0, 6.0};
  std::size_t road = 0, total = 0;
  for (std::size_t r = 0; r < 40; ++r) {
    for (std::size_t c = 0; c < 40; ++c) {
      const double cx = (static_cast<double>(c) + 0.5) * 0.25;
      const double cy = (static_cast<double>(r) + 0.5) * 0.25;
      if (std::abs(cx - at.x) <= 2.0 && std::abs(cy - at.y) <= 2.0) {
        ++total;
        road += seg.at(r, c) == static_cast<std::uint8_t>(SegClass::Road) ? 1 : 0;
      }
    }
  }
  REQUIRE(static_cast<double>(road) / static_cast<double>(total) == 0.5);

  const std::vector<FlowField> flows{zero_flow(40, 40)};
  const auto f = pool_env_features(flows, seg, at, 2.0);
  CHECK(std::abs(f.values[0] - 0.5) < 1e-9);
  CHECK(std::abs(f.values[1] - 0.5) < 1e-9);
  CHECK(f.values[2] == 0.0);
  CHECK(f.values[3] == 0.0);
}

TEST_CASE("pooled flow statistics")
{
  // Uniform flow (3, -4): mean (3, -4), magnitude 5 with zero variance.
  const auto seg = split_map(20, 20);
  FlowField flow{20, 20, std::vector<double>(400, 3.0), std::vector<double>(400, -4.0)};
  const std::vector<FlowField> flows{flow};
  const auto f = pool_env_features(flows, seg, {2.5, 2.5}, 1.0);
  CHECK(f.values[4] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.values[5] == doctest::Approx(-4.0).epsilon(1e-12));
  CHECK(f.values[6] == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(std::abs(f.values[7]) < 1e-12);
  CHECK_THROWS_AS(pool_env_features({}, seg, {1.0, 1.0}, 1.0), PerceptionError);
}

TEST_CASE("pooled occupancy stays on the simplex, including far outside the image")
{
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> pos(-100.0, 100.0);
  std::uniform_int_distribution<int> label(0, 3);
  for (int trial = 0; trial < 100; ++trial) {
    SegmentationMap seg;
    seg.height = test::random_size(rng, 1, 20);
    seg.width = test::random_size(rng, 1, 20);
    seg.meters_per_pixel = 0.5;
    seg.labels.resize(seg.height * seg.width);
    for (auto & l : seg.labels) {
      l = static_cast<std::uint8_t>(label(rng));
    }
    const std::vector<FlowField> flows{zero_flow(seg.height, seg.width)};
    const auto f = pool_env_features(flows, seg, {pos(rng), pos(rng)}, 1.0);
    double sum = 0.0;
    for (double v : f.occupancy()) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
}

TEST_CASE("neutral feature")
{
  const auto f = neutral_env_feature();
  const EnvFeature expect{{0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0}};
  CHECK(f == expect);
}

TEST_CASE("grid files round-trip")
{
  const auto dir = test::scratch_dir("grid");
  SUBCASE("frames")
  {
    ImageFrame f(3, 5);
    for (std::size_t i = 0; i < f.intensities.size(); ++i) {
      f.intensities[i] = static_cast<double>(i * 4000) / 65535.0;
    }
    write_frame_pgm(dir / "f.pgm", f);
    CHECK(read_frame_pgm(dir / "f.pgm") == f);
  }
  SUBCASE("segmentation")
  {
    auto seg = split_map(6, 2);
    seg.meters_per_pixel = 0.1;
    write_segmentation_pgm(dir / "s.pgm", seg);
    CHECK(read_segmentation_pgm(dir / "s.pgm") == seg);
  }
  SUBCASE("flow")
  {
    FlowField flow{2, 3, {1.5, -2.0, 0.1, 1e-300, 3.0, 4.0}, {0.0, 7.0, -0.5, 2.0, 1.0 / 3.0, 9.0}};
    write_flow_file(dir / "f.flo", flow);
    CHECK(read_flow_file(dir / "f.flo") == flow);
    std::ostringstream os;
    write_flow(os, flow);
    const auto bytes = os.str();
    CHECK(bytes.size() == 8 + 4 + 4 + 2 * 6 * 8);
    CHECK(bytes.substr(0, 8) == "FLOWGRID");
    // Little-endian height first.
    CHECK(bytes[8] == 2);
    CHECK(bytes[12] == 3);
  }
  SUBCASE("malformed input names the file")
  {
    std::ofstream(dir / "bad.pgm") << "P7\n1 1\n255\n0\n";
    try {
      read_frame_pgm(dir / "bad.pgm");
      FAIL("expected FormatError");
    } catch (const FormatError & e) {
      CHECK(std::string(e.what()).find("bad.pgm") != std::string::npos);
    }
    std::istringstream truncated(std::string("FLOWGRID\x02\0\0\0", 12));
    CHECK_THROWS_AS(read_flow(truncated), FormatError);
  }
}

TEST_CASE("rendering matches the observed window")
{
  const auto scene = generate_synthetic_scene({Scenario::Avoidance}, 1, 0);
  const auto r = render_scene(scene, 0.25);
  CHECK(r.frames.size() == scene.tau);
  CHECK(r.seg.width == 80);
  CHECK(r.seg.height == 80);
  CHECK(r.frames[0].width == 80);
  const auto again = render_scene(scene, 0.25);
  CHECK(r.frames == again.frames);
  CHECK(r.seg == again.seg);
}
