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

#ifndef TRAJCVAE__SCENE_HPP_
#define TRAJCVAE__SCENE_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace trajcvae
{

/// Raised when scene data violates a structural precondition.
class SceneError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// World position in meters (x east, y north).
struct TrajectoryPoint
{
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const TrajectoryPoint &, const TrajectoryPoint &) = default;
};

double distance(const TrajectoryPoint & a, const TrajectoryPoint & b);

enum class AgentClass { Pedestrian = 0, Vehicle = 1, Other = 2 };

constexpr std::size_t kAgentClassCount = 3;

AgentClass parse_agent_class(std::string_view name);
std::string_view to_string(AgentClass c);

struct AgentTrack
{
  std::int64_t agent_id = 0;
  AgentClass agent_class = AgentClass::Pedestrian;
  std::vector<TrajectoryPoint> points;

  friend bool operator==(const AgentTrack &, const AgentTrack &) = default;
};

struct PastWindow
{
  std::vector<TrajectoryPoint> points;

  const TrajectoryPoint & last() const { return points.back(); }
  friend bool operator==(const PastWindow &, const PastWindow &) = default;
};

struct FutureWindow
{
  std::vector<TrajectoryPoint> points;

  friend bool operator==(const FutureWindow &, const FutureWindow &) = default;
};

enum class Branch { Left = 0, Right = 1 };

/// Ground truth recorded by the fork generator.
struct ForkInfo
{
  Branch taken = Branch::Left;
  TrajectoryPoint left_endpoint;
  TrajectoryPoint right_endpoint;

  friend bool operator==(const ForkInfo &, const ForkInfo &) = default;
};

/**
 * @brief K agent tracks sampled every `dt` seconds, with a designated target.
 *
 * `env` holds a precomputed environment feature (see perception); `frames` and
 * `seg_map` are file references to the visual inputs it was pooled from.
 */
struct Scene
{
  std::int64_t scene_id = 0;
  std::string scenario;
  std::size_t tau = 8;
  std::size_t delta = 12;
  double dt = 0.4;
  std::size_t target_index = 0;
  std::vector<AgentTrack> tracks;
  std::optional<ForkInfo> fork;
  std::optional<std::vector<double>> env;
  std::vector<std::string> frames;
  std::optional<std::string> seg_map;

  const AgentTrack & target() const { return tracks.at(target_index); }

  friend bool operator==(const Scene &, const Scene &) = default;
};

/// Throws SceneError if the scene breaks a structural invariant.
void validate_scene(const Scene & scene);

/// Partitions a track into its first `tau` and following `delta` points.
std::pair<PastWindow, FutureWindow> split_track(
  const AgentTrack & track, std::size_t tau, std::size_t delta);

/// Past windows of every track in scene order.
std::vector<PastWindow> split_pasts(const Scene & scene);
std::pair<PastWindow, FutureWindow> split_target(const Scene & scene);

enum class Scenario { ConstantVelocity, Avoidance, Fork };

Scenario parse_scenario(std::string_view name);
std::string_view to_string(Scenario s);

/// Generator settings. The arena is [0, 20] m on both axes.
struct SyntheticSpec
{
  Scenario scenario = Scenario::ConstantVelocity;
  std::size_t tau = 8;
  std::size_t delta = 12;
  double dt = 0.4;
};

constexpr double kArenaSize = 20.0;

/**
 * @brief Synthetic scenes with known structure.
 *
 * Scene i is drawn from its own generator seeded by (seed, i), so the result
 * is a pure function of the arguments and independent of evaluation order.
 */
std::vector<Scene> generate_synthetic_scenes(
  const SyntheticSpec & spec, std::size_t count, std::uint64_t seed);

Scene generate_synthetic_scene(const SyntheticSpec & spec, std::uint64_t seed, std::size_t index);

}  // namespace trajcvae

#endif  // TRAJCVAE__SCENE_HPP_
