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

#ifndef TRAJCVAE__CVAE_HPP_
#define TRAJCVAE__CVAE_HPP_

#include "trajcvae/autodiff.hpp"
#include "trajcvae/graph.hpp"
#include "trajcvae/nn.hpp"
#include "trajcvae/scene.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace trajcvae
{

constexpr double kLogVarMin = -10.0;
constexpr double kLogVarMax = 10.0;

/**
 * Encoder q(z | future, y) and decoder p(future | z, y). Hidden sizes list
 * the perceptron's hidden widths; an empty list gives a single affine map.
 */
struct CvaeConfig
{
  std::size_t delta = 12;
  std::size_t d_y = 32;
  std::size_t d_z = 2;
  std::vector<std::size_t> encoder_hidden{64};
  std::vector<std::size_t> decoder_hidden{64};
  Activation activation = Activation::Tanh;

  MlpLayout encoder_layout() const;
  MlpLayout decoder_layout() const;
  void validate() const;
};

/// Diagonal Gaussian; log_var lies in [-10, 10].
struct LatentDistribution
{
  std::vector<double> mean;
  std::vector<double> log_var;
};

struct LatentSample
{
  std::vector<double> z;
};

/// Per-step displacements and the absolute positions they sum to.
struct PredictedFuture
{
  std::vector<TrajectoryPoint> displacements;
  std::vector<TrajectoryPoint> positions;
};

void init_cvae_params(const CvaeConfig & cfg, ParameterSet & params, std::mt19937_64 & rng);
void check_cvae_params(const CvaeConfig & cfg, const ParameterSet & params);

/// Flattened per-step (dx, dy) of a future window, starting from `origin`.
std::vector<double> future_displacements(const FutureWindow & future, const TrajectoryPoint & origin);

/// Cumulative sum of flattened displacements from `origin`.
PredictedFuture integrate_displacements(std::span<const double> flat, const TrajectoryPoint & origin);

// Differentiable forms. Rows are 1 x n.
struct LatentVars
{
  ad::Var mean;
  ad::Var log_var;
};

LatentVars encode(
  const CvaeConfig & cfg, const BoundParameters & params, ad::Var future_disp, ad::Var social);
ad::Var reparameterize(ad::Var mean, ad::Var log_var, ad::Var eps);
ad::Var decode(const CvaeConfig & cfg, const BoundParameters & params, ad::Var z, ad::Var social);
ad::Var kl_to_standard_normal(ad::Var mean, ad::Var log_var);

struct ElboTerms
{
  ad::Var loss;
  ad::Var reconstruction;
  ad::Var kl;
};

/// MSE between decoded and true displacements plus beta * KL(q || N(0, I)).
ElboTerms elbo_loss(
  const CvaeConfig & cfg, const BoundParameters & params, ad::Var future_disp, ad::Var social,
  ad::Var eps, double beta);

// Value forms.
LatentDistribution encode(
  const CvaeConfig & cfg, const ParameterSet & params, const FutureWindow & future,
  const TrajectoryPoint & last_observed, const SocialFeature & social);
LatentSample reparameterize(const LatentDistribution & dist, std::span<const double> eps);
PredictedFuture decode(
  const CvaeConfig & cfg, const ParameterSet & params, const LatentSample & z,
  const SocialFeature & social, const TrajectoryPoint & last_observed);
double kl_to_standard_normal(const LatentDistribution & dist);

/// ELBO loss for a scene's target given its social feature.
double elbo_loss(
  const CvaeConfig & cfg, const ParameterSet & params, const Scene & scene,
  const SocialFeature & social, std::span<const double> eps, double beta);

/// Draws `n_samples` latents from N(0, I) (seeded) and decodes each.
std::vector<PredictedFuture> predict(
  const CvaeConfig & cfg, const ParameterSet & params, const SocialFeature & social,
  const TrajectoryPoint & last_observed, std::size_t n_samples, std::uint64_t seed);

}  // namespace trajcvae

#endif  // TRAJCVAE__CVAE_HPP_
