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

#ifndef TRAJCVAE__TRAIN_HPP_
#define TRAJCVAE__TRAIN_HPP_

#include "trajcvae/model.hpp"
#include "trajcvae/nn.hpp"
#include "trajcvae/scene.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace trajcvae
{

/// When Adam steps: after every scene, or once per epoch on the mean gradient.
enum class UpdateMode { PerScene, PerEpoch };

UpdateMode parse_update_mode(std::string_view name);
std::string_view to_string(UpdateMode mode);

struct TrainConfig
{
  double learning_rate = 1e-3;
  std::size_t epochs = 100;
  double beta = 0.1;
  std::size_t k_samples = 20;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  UpdateMode update = UpdateMode::PerScene;

  void validate() const;
};

/// Adam with bias correction; one moment pair per parameter tensor.
class Adam
{
public:
  Adam(const ParameterSet & params, double learning_rate, double beta1, double beta2, double eps);

  void step(ParameterSet & params, std::span<const ad::Tensor> grads);
  std::size_t steps() const { return t_; }

private:
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

struct TrainResult
{
  ParameterSet params;
  std::vector<double> loss_history;
};

/// Called after each epoch with (epoch index, mean loss, current parameters).
using EpochCallback = std::function<void(std::size_t, double, const ParameterSet &)>;

/**
 * @brief Full-batch-per-scene Adam training on the pipeline ELBO.
 *
 * Scenes are visited in input order every epoch. In PerEpoch mode the
 * per-scene gradients are averaged in that order before a single step.
 * Parameters are initialised
 * from config.seed (unless `initial` is given) and one eps vector per scene
 * per epoch is drawn from a separate stream derived from the same seed.
 * loss_history holds the mean loss of each epoch.
 */
TrainResult train(
  std::span<const Scene> scenes, const ModelConfig & model, const TrainConfig & config,
  const std::optional<ParameterSet> & initial = std::nullopt, const EpochCallback & on_epoch = {});

/// Deterministic eps stream used by train().
class EpsStream
{
public:
  EpsStream(std::uint64_t seed, std::size_t d_z);
  std::vector<double> next();

private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::size_t d_z_;
};

}  // namespace trajcvae

#endif  // TRAJCVAE__TRAIN_HPP_
