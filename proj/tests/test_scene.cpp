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

#include "trajcvae/scene.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <string>

using namespace trajcvae;

namespace
{

AgentTrack numbered_track(std::int64_t id, std::size_t length)
{
  AgentTrack t;
  t.agent_id = id;
  for (std::size_t i = 0; i < length; ++i) {
    t.points.push_back({static_cast<double>(i), -static_cast<double>(i) * 0.5});
  }
  return t;
}

// Probability that Binomial(n, 1/2) lands outside [lo, hi], summed in log space.
double binomial_outside(int n, int lo, int hi)
{
  double p = 0.0;
  for (int k = 0; k <= n; ++k) {
    if (k >= lo && k <= hi) {
      continue;
    }
    const double log_c = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    p += std::exp(log_c - n * std::log(2.0));
  }
  return p;
}

}  // namespace

TEST_CASE("split_track slices past and future")
{
  const auto track = numbered_track(4, 20);
  const auto [past, future] = split_track(track, 8, 12);
  REQUIRE(past.points.size() == 8);
  REQUIRE(future.points.size() == 12);
  CHECK(past.points.front() == track.points[0]);
  CHECK(past.last() == track.points[7]);
  CHECK(future.points.front() == track.points[8]);
  CHECK(future.points.back() == track.points[19]);

  const auto [p2, f2] = split_track(track, 2, 1);
  CHECK(p2.points.size() == 2);
  CHECK(f2.points.size() == 1);
}

TEST_CASE("split_track rejects short tracks naming the track")
{
  const auto track = numbered_track(17, 10);
  try {
    split_track(track, 8, 12);
    FAIL("expected an error");
  } catch (const SceneError & e) {
    const std::string what = e.what();
    CHECK(what.find("track too short") != std::string::npos);
    CHECK(what.find("17") != std::string::npos);
    CHECK(what.find("20") != std::string::npos);
  }
}

TEST_CASE("split_track is a partition")
{
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto tau = test::random_size(rng, 2, 10);
    const auto delta = test::random_size(rng, 1, 15);
    const auto extra = test::random_size(rng, 0, 5);
    AgentTrack track;
    track.agent_id = i;
    std::normal_distribution<double> n(0.0, 3.0);
    for (std::size_t k = 0; k < tau + delta + extra; ++k) {
      track.points.push_back({n(rng), n(rng)});
    }
    const auto [past, future] = split_track(track, tau, delta);
    REQUIRE(past.points.size() == tau);
    REQUIRE(future.points.size() == delta);
    std::vector<TrajectoryPoint> joined = past.points;
    joined.insert(joined.end(), future.points.begin(), future.points.end());
    CHECK(std::equal(joined.begin(), joined.end(), track.points.begin()));
  }
}

TEST_CASE("validate_scene")
{
  Scene scene;
  scene.tau = 2;
  scene.delta = 1;
  scene.tracks = {numbered_track(0, 3), numbered_track(1, 3)};
  CHECK_NOTHROW(validate_scene(scene));

  auto dup = scene;
  dup.tracks[1].agent_id = 0;
  CHECK_THROWS_AS(validate_scene(dup), SceneError);

  auto bad_target = scene;
  bad_target.target_index = 2;
  CHECK_THROWS_AS(validate_scene(bad_target), SceneError);

  auto nan = scene;
  nan.tracks[0].points[1].x = std::nan("");
  CHECK_THROWS_AS(validate_scene(nan), SceneError);
}

TEST_CASE("constant velocity scenes have constant displacement")
{
  const auto scenes = generate_synthetic_scenes({Scenario::ConstantVelocity}, 1, 7);
  REQUIRE(scenes.size() == 1);
  for (const auto & t : scenes[0].tracks) {
    REQUIRE(t.points.size() == 20);
    const double dx = t.points[1].x - t.points[0].x;
    const double dy = t.points[1].y - t.points[0].y;
    for (std::size_t i = 1; i + 1 < t.points.size(); ++i) {
      CHECK(std::abs(t.points[i + 1].x - t.points[i].x - dx) < 1e-12);
      CHECK(std::abs(t.points[i + 1].y - t.points[i].y - dy) < 1e-12);
    }
  }
}

TEST_CASE("fork scenes split evenly between branches")
{
  // Under a fair coin the window [450, 550] misses with probability below 0.2%.
  CHECK(binomial_outside(1000, 450, 550) < 2e-3);
  const auto scenes = generate_synthetic_scenes({Scenario::Fork}, 1000, 3);
  int left = 0;
  for (const auto & s : scenes) {
    REQUIRE(s.fork.has_value());
    left += s.fork->taken == Branch::Left ? 1 : 0;
    // The truth endpoint is the endpoint of the branch taken.
    const auto & end = s.target().points.back();
    const auto & expect = s.fork->taken == Branch::Left ? s.fork->left_endpoint :
                                                          s.fork->right_endpoint;
    CHECK(distance(end, expect) < 1e-9);
  }
  const double fraction = left / 1000.0;
  CHECK(fraction >= 0.45);
  CHECK(fraction <= 0.55);
}

TEST_CASE("generation is deterministic and bounded")
{
  for (auto scenario : {Scenario::ConstantVelocity, Scenario::Avoidance, Scenario::Fork}) {
    const SyntheticSpec spec{scenario};
    const auto a = generate_synthetic_scenes(spec, 50, 3);
    const auto b = generate_synthetic_scenes(spec, 50, 3);
    CHECK(a == b);
    CHECK(a != generate_synthetic_scenes(spec, 50, 4));
    // Scene i does not depend on how many scenes were requested.
    CHECK(a[7] == generate_synthetic_scene(spec, 3, 7));
    std::set<std::int64_t> ids;
    for (const auto & s : a) {
      CHECK_NOTHROW(validate_scene(s));
      ids.insert(s.scene_id);
      for (const auto & t : s.tracks) {
        CHECK(t.points.size() == spec.tau + spec.delta);
        for (const auto & p : t.points) {
          CHECK(std::isfinite(p.x));
          CHECK(std::isfinite(p.y));
          CHECK(p.x >= 0.0);
          CHECK(p.x <= kArenaSize);
          CHECK(p.y >= 0.0);
          CHECK(p.y <= kArenaSize);
        }
      }
    }
    CHECK(ids.size() == a.size());
  }
}

TEST_CASE("scenario names")
{
  CHECK(parse_scenario("constant_velocity") == Scenario::ConstantVelocity);
  CHECK(parse_scenario("fork") == Scenario::Fork);
  CHECK(to_string(parse_scenario("avoidance")) == "avoidance");
  CHECK_THROWS(parse_scenario("teleport"));
  CHECK(parse_agent_class("vehicle") == AgentClass::Vehicle);
  CHECK_THROWS(parse_agent_class("bicycle"));
}
