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

#ifndef TRAJCVAE__MODEL_HPP_
#define TRAJCVAE__MODEL_HPP_

#include "trajcvae/cvae.hpp"
#include "trajcvae/graph.hpp"
#include "trajcvae/nn.hpp"
#include "trajcvae/scene.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace trajcvae
{

/// Graph feature extractor and CVAE sharing d_y.
struct ModelConfig
{
  GraphConfig graph;
  CvaeConfig cvae;

  static ModelConfig with_defaults(std::size_t tau, std::size_t delta);
  void validate() const;
  /// Throws SceneError when the scene's tau/delta differ from the model's.
  void check_scene(const Scene & scene) const;
};

ParameterSet init_model(const ModelConfig & cfg, std::uint64_t seed);
void check_model(const ModelConfig & cfg, const ParameterSet & params);

/// Per-scene quantities that do not depend on parameters.
struct PreparedScene
{
  InteractionGraph graph;
  TrajectoryPoint last_observed;
  FutureWindow future;
  std::vector<double> future_disp;
};

/// Uses scene.env when present, otherwise the neutral environment feature.
PreparedScene prepare_scene(const Scene & scene, const ModelConfig & cfg);
EnvFeature scene_env_feature(const Scene & scene);

/// message_passing -> encode -> reparameterize -> decode -> ELBO.
ElboTerms pipeline_loss(
  const ModelConfig & cfg, const BoundParameters & params, const PreparedScene & scene,
  std::span<const double> eps, double beta);

SocialFeature social_feature(
  const ModelConfig & cfg, const ParameterSet & params, const PreparedScene & scene);

/// K futures with z ~ N(0, I); absolute positions start at the last observation.
std::vector<PredictedFuture> predict_scene(
  const ModelConfig & cfg, const ParameterSet & params, const PreparedScene & scene,
  std::size_t n_samples, std::uint64_t seed);

/// Single future decoded at z = 0 (the prior mean).
PredictedFuture predict_mean(
  const ModelConfig & cfg, const ParameterSet & params, const PreparedScene & scene);

}  // namespace trajcvae

#endif  // TRAJCVAE__MODEL_HPP_
