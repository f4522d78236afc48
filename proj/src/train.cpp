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

#include "trajcvae/train.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace trajcvae
{

UpdateMode parse_update_mode(std::string_view name)
{
  if (name == "scene") {
    return UpdateMode::PerScene;
  }
  if (name == "epoch") {
    return UpdateMode::PerEpoch;
  }
  throw std::invalid_argument("unknown update mode '" + std::string(name) + "' (expected scene or epoch)");
}

std::string_view to_string(UpdateMode mode)
{
  return mode == UpdateMode::PerEpoch ? "epoch" : "scene";
}

void TrainConfig::validate() const
{
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning_rate must be non-negative");
  }
  if (epochs == 0) {
    throw std::invalid_argument("epochs must be positive");
  }
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("beta must be non-negative");
  }
  if (k_samples == 0) {
    throw std::invalid_argument("k_samples must be positive");
  }
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw std::invalid_argument("adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) {
    throw std::invalid_argument("adam_eps must be positive");
  }
}

Adam::Adam(const ParameterSet & params, double learning_rate, double beta1, double beta2, double eps)
: lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps)
{
  for (const auto & e : params.entries()) {
    m_.emplace_back(e.tensor.size(), 0.0);
    v_.emplace_back(e.tensor.size(), 0.0);
  }
}

void Adam::step(ParameterSet & params, std::span<const ad::Tensor> grads)
{
  auto & entries = params.entries();
  if (grads.size() != entries.size() || m_.size() != entries.size()) {
    throw std::invalid_argument("Adam::step: gradient count does not match parameters");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t p = 0; p < entries.size(); ++p) {
    auto values = entries[p].tensor.values();
    const auto & g = grads[p];
    if (g.size() != values.size()) {
      throw std::invalid_argument("Adam::step: gradient shape mismatch for " + entries[p].name);
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      m_[p][i] = beta1_ * m_[p][i] + (1.0 - beta1_) * g[i];
      v_[p][i] = beta2_ * v_[p][i] + (1.0 - beta2_) * g[i] * g[i];
      const double m_hat = m_[p][i] / c1;
      const double v_hat = v_[p][i] / c2;
      values[i] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
    }
  }
}

EpsStream::EpsStream(std::uint64_t seed, std::size_t d_z)
: rng_(seed ^ 0x9E3779B97F4A7C15ULL), d_z_(d_z)
{
}

std::vector<double> EpsStream::next()
{
  std::vector<double> eps(d_z_);
  for (auto & v : eps) {
    v = normal_(rng_);
  }
  return eps;
}

TrainResult train(
  std::span<const Scene> scenes, const ModelConfig & model, const TrainConfig & config,
  const std::optional<ParameterSet> & initial, const EpochCallback & on_epoch)
{
  config.validate();
  model.validate();
  if (scenes.empty()) {
    throw std::invalid_argument("train: no scenes");
  }
  // Validate everything before any compute.
  std::vector<PreparedScene> prepared;
  prepared.reserve(scenes.size());
  for (const auto & scene : scenes) {
    prepared.push_back(prepare_scene(scene, model));
  }

  TrainResult result;
  result.params = initial ? *initial : init_model(model, config.seed);
  check_model(model, result.params);
  Adam adam(result.params, config.learning_rate, config.adam_beta1, config.adam_beta2,
    config.adam_eps);
  EpsStream eps_stream(config.seed, model.cvae.d_z);

  const bool per_epoch = config.update == UpdateMode::PerEpoch;
  std::vector<ad::Tensor> summed;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double total = 0.0;
    summed.clear();
    for (const auto & scene : prepared) {
      const auto eps = eps_stream.next();
      ad::Tape tape;
      const BoundParameters bound(tape, result.params);
      const auto terms = pipeline_loss(model, bound, scene, eps, config.beta);
      tape.backward(terms.loss);
      std::vector<ad::Tensor> grads;
      grads.reserve(bound.vars().size());
      for (const auto & v : bound.vars()) {
        grads.push_back(tape.grad(v));
      }
      total += terms.loss.value().item();
      if (!per_epoch) {
        adam.step(result.params, grads);
      } else if (summed.empty()) {
        summed = std::move(grads);
      } else {
        for (std::size_t p = 0; p < grads.size(); ++p) {
          auto acc = summed[p].values();
          const auto g = grads[p].values();
          for (std::size_t i = 0; i < acc.size(); ++i) {
            acc[i] += g[i];
          }
        }
      }
    }
    if (per_epoch) {
      const double inv = 1.0 / static_cast<double>(prepared.size());
      for (auto & g : summed) {
        for (auto & v : g.values()) {
          v *= inv;
        }
      }
      adam.step(result.params, summed);
    }
    const double mean = total / static_cast<double>(prepared.size());
    if (!std::isfinite(mean)) {
      throw ad::NonFiniteError("train: non-finite loss at epoch " + std::to_string(epoch));
    }
    result.loss_history.push_back(mean);
    if (on_epoch) {
      on_epoch(epoch, mean, result.params);
    }
  }
  return result;
}

}  // namespace trajcvae
