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

#ifndef TRAJCVAE__METRICS_HPP_
#define TRAJCVAE__METRICS_HPP_

#include "trajcvae/model.hpp"
#include "trajcvae/scene.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace trajcvae
{

/// Absolute future positions, one per step.
using Trajectory = std::vector<TrajectoryPoint>;

/// K sampled futures for one scene.
struct ScenePrediction
{
  std::int64_t scene_id = 0;
  std::vector<Trajectory> samples;

  friend bool operator==(const ScenePrediction &, const ScenePrediction &) = default;
};

struct Metrics
{
  double min_ade = 0.0;  // [m]
  double min_fde = 0.0;  // [m]
  std::optional<double> mode_coverage;  // fork scenes only
  std::size_t scenes = 0;
  std::size_t fork_scenes = 0;
};

/// Mean pointwise Euclidean error of one trajectory.
double average_displacement_error(const Trajectory & prediction, const FutureWindow & truth);
double final_displacement_error(const Trajectory & prediction, const FutureWindow & truth);

/// Minimum over samples of the mean pointwise error. Requires at least one sample.
double min_ade(std::span<const Trajectory> predictions, const FutureWindow & truth);
/// Minimum over samples of the final-point error.
double min_fde(std::span<const Trajectory> predictions, const FutureWindow & truth);

/// True when some sample ends within `threshold` of each branch endpoint.
bool covers_both_branches(
  std::span<const Trajectory> predictions, const ForkInfo & fork, double threshold);

struct EvalOptions
{
  std::size_t k_samples = 20;
  std::uint64_t seed = 0;
  /// Decode a single sample at z = 0 instead of drawing from the prior.
  bool zero_latent = false;
  double coverage_threshold_m = 0.5;
};

/// Seed for the samples of scene `index`, derived from the evaluation seed.
std::uint64_t scene_sample_seed(std::uint64_t seed, std::size_t index);

/// Samples the model on every scene, in scene order.
std::vector<ScenePrediction> predict_scenes(
  std::span<const Scene> scenes, const ModelConfig & model, const ParameterSet & params,
  const EvalOptions & options);

/// Aggregates per-scene metrics; predictions are matched to scenes by scene_id.
Metrics evaluate_predictions(
  std::span<const Scene> scenes, std::span<const ScenePrediction> predictions,
  double coverage_threshold_m = 0.5);

Metrics evaluate(
  std::span<const Scene> scenes, const ModelConfig & model, const ParameterSet & params,
  const EvalOptions & options);

}  // namespace trajcvae

#endif  // TRAJCVAE__METRICS_HPP_
