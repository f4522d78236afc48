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

#include "trajcvae/model.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <string>

namespace trajcvae
{

ModelConfig ModelConfig::with_defaults(std::size_t tau, std::size_t delta)
{
  ModelConfig cfg;
  cfg.graph.tau = tau;
  cfg.cvae.delta = delta;
  cfg.cvae.d_y = cfg.graph.d_y;
  return cfg;
}

void ModelConfig::validate() const
{
  graph.validate();
  cvae.validate();
  if (graph.d_y != cvae.d_y) {
    throw std::invalid_argument("model config: graph d_y and cvae d_y differ");
  }
}

void ModelConfig::check_scene(const Scene & scene) const
{
  if (scene.tau != graph.tau || scene.delta != cvae.delta) {
    throw SceneError(
      "scene " + std::to_string(scene.scene_id) + " has tau=" + std::to_string(scene.tau) +
      " delta=" + std::to_string(scene.delta) + ", model expects tau=" + std::to_string(graph.tau) +
      " delta=" + std::to_string(cvae.delta));
  }
}

ParameterSet init_model(const ModelConfig & cfg, std::uint64_t seed)
{
  cfg.validate();
  std::mt19937_64 rng(seed);
  ParameterSet params;
  init_graph_params(cfg.graph, params, rng);
  init_cvae_params(cfg.cvae, params, rng);
  return params;
}

void check_model(const ModelConfig & cfg, const ParameterSet & params)
{
  cfg.validate();
  check_graph_params(cfg.graph, params);
  check_cvae_params(cfg.cvae, params);
}

EnvFeature scene_env_feature(const Scene & scene)
{
  if (!scene.env) {
    return neutral_env_feature();
  }
  if (scene.env->size() != kEnvFeatureDim) {
    throw SceneError(
      "scene " + std::to_string(scene.scene_id) + ": env feature has " +
      std::to_string(scene.env->size()) + " values, expected " + std::to_string(kEnvFeatureDim));
  }
  EnvFeature f;
  std::copy(scene.env->begin(), scene.env->end(), f.values.begin());
  return f;
}

PreparedScene prepare_scene(const Scene & scene, const ModelConfig & cfg)
{
  validate_scene(scene);
  cfg.check_scene(scene);
  const auto pasts = split_pasts(scene);
  const auto [past, future] = split_target(scene);
  PreparedScene out;
  out.graph = build_graph(scene, pasts, scene_env_feature(scene), cfg.graph.radius_m);
  out.last_observed = past.last();
  out.future = future;
  out.future_disp = future_displacements(future, past.last());
  return out;
}

namespace
{

ad::Var social_var(ad::Tape & tape, const ModelConfig & cfg, const BoundParameters & params,
  const PreparedScene & scene)
{
  return message_passing(cfg.graph, params, bind_graph(tape, scene.graph));
}

}  // namespace

ElboTerms pipeline_loss(
  const ModelConfig & cfg, const BoundParameters & params, const PreparedScene & scene,
  std::span<const double> eps, double beta)
{
  if (eps.size() != cfg.cvae.d_z) {
    throw ad::ShapeError(
      "pipeline_loss: eps has " + std::to_string(eps.size()) + " values, expected d_z=" +
      std::to_string(cfg.cvae.d_z));
  }
  auto & tape = params.vars().front().tape();
  const auto social = social_var(tape, cfg, params, scene);
  return elbo_loss(cfg.cvae, params, tape.constant(ad::Tensor::row(scene.future_disp)), social,
    tape.constant(ad::Tensor::row({eps.begin(), eps.end()})), beta);
}

SocialFeature social_feature(
  const ModelConfig & cfg, const ParameterSet & params, const PreparedScene & scene)
{
  return message_passing(cfg.graph, params, scene.graph);
}

std::vector<PredictedFuture> predict_scene(
  const ModelConfig & cfg, const ParameterSet & params, const PreparedScene & scene,
  std::size_t n_samples, std::uint64_t seed)
{
  const auto social = social_feature(cfg, params, scene);
  return predict(cfg.cvae, params, social, scene.last_observed, n_samples, seed);
}

PredictedFuture predict_mean(
  const ModelConfig & cfg, const ParameterSet & params, const PreparedScene & scene)
{
  const auto social = social_feature(cfg, params, scene);
  const LatentSample z{std::vector<double>(cfg.cvae.d_z, 0.0)};
  return decode(cfg.cvae, params, z, social, scene.last_observed);
}

}  // namespace trajcvae
