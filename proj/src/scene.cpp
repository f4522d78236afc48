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

#include "trajcvae/scene.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace trajcvae
{

double distance(const TrajectoryPoint & a, const TrajectoryPoint & b)
{
  return std::hypot(a.x - b.x, a.y - b.y);
}

AgentClass parse_agent_class(std::string_view name)
{
  if (name == "pedestrian") {
    return AgentClass::Pedestrian;
  }
  if (name == "vehicle") {
    return AgentClass::Vehicle;
  }
  if (name == "other") {
    return AgentClass::Other;
  }
  throw SceneError("unknown agent class '" + std::string(name) + "'");
}

std::string_view to_string(AgentClass c)
{
  switch (c) {
    case AgentClass::Pedestrian:
      return "pedestrian";
    case AgentClass::Vehicle:
      return "vehicle";
    case AgentClass::Other:
      return "other";
  }
  return "other";
}

void validate_scene(const Scene & scene)
{
  const std::string where = "scene " + std::to_string(scene.scene_id) + ": ";
  if (scene.tracks.empty()) {
    throw SceneError(where + "no tracks");
  }
  if (scene.tau < 2) {
    throw SceneError(where + "tau must be at least 2");
  }
  if (scene.delta < 1) {
    throw SceneError(where + "delta must be at least 1");
  }
  if (!(scene.dt > 0.0) || !std::isfinite(scene.dt)) {
    throw SceneError(where + "dt must be positive");
  }
  if (scene.target_index >= scene.tracks.size()) {
    throw SceneError(
      where + "target_index " + std::to_string(scene.target_index) + " out of range for " +
      std::to_string(scene.tracks.size()) + " tracks");
  }
  const std::size_t length = scene.tau + scene.delta;
  std::set<std::int64_t> ids;
  for (const auto & track : scene.tracks) {
    if (track.agent_id < 0) {
      throw SceneError(where + "negative agent_id " + std::to_string(track.agent_id));
    }
    if (!ids.insert(track.agent_id).second) {
      throw SceneError(where + "duplicate agent_id " + std::to_string(track.agent_id));
    }
    if (track.points.size() != length) {
      throw SceneError(
        where + "track " + std::to_string(track.agent_id) + " has " +
        std::to_string(track.points.size()) + " points, expected tau+delta=" +
        std::to_string(length));
    }
    for (const auto & p : track.points) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw SceneError(where + "track " + std::to_string(track.agent_id) + " has a non-finite point");
      }
    }
  }
  if (scene.env) {
    for (double v : *scene.env) {
      if (!std::isfinite(v)) {
        throw SceneError(where + "non-finite env feature");
      }
    }
  }
}

std::pair<PastWindow, FutureWindow> split_track(
  const AgentTrack & track, std::size_t tau, std::size_t delta)
{
  if (tau < 2 || delta < 1) {
    throw SceneError(
      "split_track: need tau >= 2 and delta >= 1, got tau=" + std::to_string(tau) +
      " delta=" + std::to_string(delta));
  }
  if (track.points.size() < tau + delta) {
    throw SceneError(
      "track too short: agent " + std::to_string(track.agent_id) + " has " +
      std::to_string(track.points.size()) + " points, requires " + std::to_string(tau + delta));
  }
  const auto mid = track.points.begin() + static_cast<std::ptrdiff_t>(tau);
  PastWindow past{{track.points.begin(), mid}};
  FutureWindow future{{mid, mid + static_cast<std::ptrdiff_t>(delta)}};
  return {std::move(past), std::move(future)};
}

std::vector<PastWindow> split_pasts(const Scene & scene)
{
  std::vector<PastWindow> pasts;
  pasts.reserve(scene.tracks.size());
  for (const auto & track : scene.tracks) {
    pasts.push_back(split_track(track, scene.tau, scene.delta).first);
  }
  return pasts;
}

std::pair<PastWindow, FutureWindow> split_target(const Scene & scene)
{
  return split_track(scene.target(), scene.tau, scene.delta);
}

Scenario parse_scenario(std::string_view name)
{
  if (name == "constant_velocity") {
    return Scenario::ConstantVelocity;
  }
  if (name == "avoidance") {
    return Scenario::Avoidance;
  }
  if (name == "fork") {
    return Scenario::Fork;
  }
  throw SceneError(
    "unknown scenario '" + std::string(name) + "' (expected constant_velocity, avoidance or fork)");
}

std::string_view to_string(Scenario s)
{
  switch (s) {
    case Scenario::ConstantVelocity:
      return "constant_velocity";
    case Scenario::Avoidance:
      return "avoidance";
    case Scenario::Fork:
      return "fork";
  }
  return "constant_velocity";
}

namespace
{

constexpr double kMargin = 1.0;

std::mt19937_64 scene_rng(std::uint64_t seed, std::size_t index)
{
  const auto idx = static_cast<std::uint64_t>(index);
  std::seed_seq seq{
    static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
    static_cast<std::uint32_t>(idx), static_cast<std::uint32_t>(idx >> 32)};
  return std::mt19937_64(seq);
}

double uniform(std::mt19937_64 & rng, double lo, double hi)
{
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Straight-line track whose whole extent stays inside the arena margin.
AgentTrack constant_velocity_track(
  std::mt19937_64 & rng, std::int64_t id, AgentClass cls, std::size_t length, double dt,
  double min_speed, double max_speed)
{
  const double pi = std::acos(-1.0);
  const double speed = uniform(rng, min_speed, max_speed);
  const double heading = uniform(rng, -pi, pi);
  const double vx = speed * std::cos(heading);
  const double vy = speed * std::sin(heading);
  const double span = static_cast<double>(length - 1) * dt;
  auto start = [&](double v) {
    const double lo = kMargin - std::min(0.0, v * span);
    const double hi = kArenaSize - kMargin - std::max(0.0, v * span);
    return uniform(rng, lo, std::max(lo, hi));
  };
  const double x0 = start(vx);
  const double y0 = start(vy);

  AgentTrack track{id, cls, {}};
  track.points.reserve(length);
  for (std::size_t t = 0; t < length; ++t) {
    const double time = static_cast<double>(t) * dt;
    track.points.push_back({x0 + vx * time, y0 + vy * time});
  }
  return track;
}

Scene make_constant_velocity(const SyntheticSpec & spec, std::mt19937_64 & rng)
{
  Scene scene;
  const std::size_t length = spec.tau + spec.delta;
  const auto agents = std::uniform_int_distribution<std::size_t>(2, 4)(rng);
  const double max_speed = std::min(1.5, (kArenaSize - 2.0 * kMargin) * 0.8 /
    (static_cast<double>(length - 1) * spec.dt));
  for (std::size_t i = 0; i < agents; ++i) {
    scene.tracks.push_back(constant_velocity_track(
      rng, static_cast<std::int64_t>(i), AgentClass::Pedestrian, length, spec.dt,
      0.5 * max_speed, max_speed));
  }
  return scene;
}

// Two agents on a collision course; each swerves to its own right around the meeting time.
Scene make_avoidance(const SyntheticSpec & spec, std::mt19937_64 & rng)
{
  Scene scene;
  const std::size_t length = spec.tau + spec.delta;
  const double duration = static_cast<double>(length - 1) * spec.dt;
  const double t_meet = duration * uniform(rng, 0.6, 0.8);
  const double x_meet = uniform(rng, 9.0, 11.0);
  // Each agent covers at most 8 m before the meeting point.
  const double nominal = std::min(1.2, 8.0 / t_meet);
  const double s_target = nominal * uniform(rng, 0.85, 1.0);
  const double s_other = nominal * uniform(rng, 0.85, 1.0);
  const double lane_y = uniform(rng, 6.0, 14.0);
  const double other_y = lane_y + uniform(rng, -0.3, 0.3);
  const double x_target = x_meet - s_target * t_meet;
  const double x_other = x_meet + s_other * t_meet;
  const double amplitude = uniform(rng, 0.8, 1.2);
  const double width = 1.5;

  AgentTrack target{0, AgentClass::Pedestrian, {}};
  AgentTrack other{1, AgentClass::Pedestrian, {}};
  for (std::size_t t = 0; t < length; ++t) {
    const double time = static_cast<double>(t) * spec.dt;
    const double bump = amplitude * std::exp(-std::pow((time - t_meet) / width, 2.0));
    target.points.push_back({x_target + s_target * time, lane_y - bump});
    other.points.push_back({x_other - s_other * time, other_y + bump});
  }
  scene.tracks.push_back(std::move(target));
  scene.tracks.push_back(std::move(other));
  return scene;
}

// Target heads north, continues a few steps past the last observation, then turns
// west (left) or east (right) with equal probability.
Scene make_fork(const SyntheticSpec & spec, std::mt19937_64 & rng)
{
  Scene scene;
  const std::size_t length = spec.tau + spec.delta;
  const std::size_t straight = spec.delta / 6;
  const std::size_t junction = spec.tau - 1 + straight;
  const double lateral_steps = static_cast<double>(spec.delta - straight);
  const double nominal = std::min({2.0, 8.0 / (lateral_steps * spec.dt),
    13.0 / (static_cast<double>(junction) * spec.dt)});
  const double speed = nominal * uniform(rng, 0.95, 1.05);
  const double x0 = uniform(rng, 9.5, 10.5);
  const double y0 = uniform(rng, 1.5, 2.5);
  const bool left = std::bernoulli_distribution(0.5)(rng);

  auto position = [&](std::size_t t, double side) -> TrajectoryPoint {
    const double step = speed * spec.dt;
    if (t <= junction) {
      return {x0, y0 + step * static_cast<double>(t)};
    }
    return {x0 + side * step * static_cast<double>(t - junction),
      y0 + step * static_cast<double>(junction)};
  };

  AgentTrack target{0, AgentClass::Vehicle, {}};
  for (std::size_t t = 0; t < length; ++t) {
    target.points.push_back(position(t, left ? -1.0 : 1.0));
  }
  scene.tracks.push_back(std::move(target));
  scene.fork = ForkInfo{
    left ? Branch::Left : Branch::Right, position(length - 1, -1.0), position(length - 1, 1.0)};

  const auto bystanders = std::uniform_int_distribution<std::size_t>(1, 2)(rng);
  for (std::size_t i = 0; i < bystanders; ++i) {
    scene.tracks.push_back(constant_velocity_track(
      rng, static_cast<std::int64_t>(i + 1), AgentClass::Pedestrian, length, spec.dt, 0.4, 0.9));
  }
  return scene;
}

}  // namespace

Scene generate_synthetic_scene(const SyntheticSpec & spec, std::uint64_t seed, std::size_t index)
{
  if (spec.tau < 2 || spec.delta < 1 || !(spec.dt > 0.0)) {
    throw SceneError("synthetic spec needs tau >= 2, delta >= 1 and dt > 0");
  }
  auto rng = scene_rng(seed, index);
  Scene scene;
  switch (spec.scenario) {
    case Scenario::ConstantVelocity:
      scene = make_constant_velocity(spec, rng);
      break;
    case Scenario::Avoidance:
      scene = make_avoidance(spec, rng);
      break;
    case Scenario::Fork:
      scene = make_fork(spec, rng);
      break;
  }
  scene.scene_id = static_cast<std::int64_t>(index);
  scene.scenario = std::string(to_string(spec.scenario));
  scene.tau = spec.tau;
  scene.delta = spec.delta;
  scene.dt = spec.dt;
  scene.target_index = 0;
  return scene;
}

std::vector<Scene> generate_synthetic_scenes(
  const SyntheticSpec & spec, std::size_t count, std::uint64_t seed)
{
  if (count == 0) {
    throw SceneError("scene count must be at least 1");
  }
  std::vector<Scene> scenes;
  scenes.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    scenes.push_back(generate_synthetic_scene(spec, seed, i));
  }
  return scenes;
}

}  // namespace trajcvae
