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

#include "trajcvae/cvae.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace trajcvae
{

MlpLayout CvaeConfig::encoder_layout() const
{
  MlpLayout layout{"encoder", {2 * delta + d_y}, activation, Activation::Identity};
  layout.sizes.insert(layout.sizes.end(), encoder_hidden.begin(), encoder_hidden.end());
  layout.sizes.push_back(2 * d_z);
  return layout;
}

MlpLayout CvaeConfig::decoder_layout() const
{
  MlpLayout layout{"decoder", {d_z + d_y}, activation, Activation::Identity};
  layout.sizes.insert(layout.sizes.end(), decoder_hidden.begin(), decoder_hidden.end());
  layout.sizes.push_back(2 * delta);
  return layout;
}

void CvaeConfig::validate() const
{
  if (delta == 0 || d_y == 0 || d_z == 0) {
    throw std::invalid_argument("cvae config: delta, d_y and d_z must be positive");
  }
  for (auto h : encoder_hidden) {
    if (h == 0) {
      throw std::invalid_argument("cvae config: zero-width encoder layer");
    }
  }
  for (auto h : decoder_hidden) {
    if (h == 0) {
      throw std::invalid_argument("cvae config: zero-width decoder layer");
    }
  }
}

void init_cvae_params(const CvaeConfig & cfg, ParameterSet & params, std::mt19937_64 & rng)
{
  cfg.validate();
  init_mlp(cfg.encoder_layout(), params, rng);
  init_mlp(cfg.decoder_layout(), params, rng);
}

void check_cvae_params(const CvaeConfig & cfg, const ParameterSet & params)
{
  cfg.validate();
  check_mlp(cfg.encoder_layout(), params);
  check_mlp(cfg.decoder_layout(), params);
}

std::vector<double> future_displacements(const FutureWindow & future, const TrajectoryPoint & origin)
{
  std::vector<double> out;
  out.reserve(2 * future.points.size());
  TrajectoryPoint prev = origin;
  for (const auto & p : future.points) {
    out.push_back(p.x - prev.x);
    out.push_back(p.y - prev.y);
    prev = p;
  }
  return out;
}

PredictedFuture integrate_displacements(std::span<const double> flat, const TrajectoryPoint & origin)
{
  if (flat.size() % 2 != 0) {
    throw std::invalid_argument("displacement vector must hold (dx, dy) pairs");
  }
  PredictedFuture out;
  TrajectoryPoint pos = origin;
  for (std::size_t i = 0; i < flat.size(); i += 2) {
    out.displacements.push_back({flat[i], flat[i + 1]});
    pos.x += flat[i];
    pos.y += flat[i + 1];
    out.positions.push_back(pos);
  }
  return out;
}

namespace
{

void require_cols(ad::Var v, std::size_t cols, const char * what)
{
  const auto & t = v.value();
  if (t.rank() != 2 || t.rows() != 1 || t.cols() != cols) {
    throw ad::ShapeError(
      std::string(what) + " has shape " + ad::shape_to_string(t.shape()) + ", expected [1x" +
      std::to_string(cols) + "]");
  }
}

}  // namespace

LatentVars encode(
  const CvaeConfig & cfg, const BoundParameters & params, ad::Var future_disp, ad::Var social)
{
  check_cvae_params(cfg, params.params());
  require_cols(future_disp, 2 * cfg.delta, "future displacements");
  require_cols(social, cfg.d_y, "social feature");
  const std::array<ad::Var, 2> input{future_disp, social};
  const auto out = mlp_forward(cfg.encoder_layout(), params, ad::hstack(input));
  return LatentVars{
    ad::slice_cols(out, 0, cfg.d_z),
    ad::clamp(ad::slice_cols(out, cfg.d_z, 2 * cfg.d_z), kLogVarMin, kLogVarMax)};
}

ad::Var reparameterize(ad::Var mean, ad::Var log_var, ad::Var eps)
{
  if (mean.shape() != log_var.shape() || mean.shape() != eps.shape()) {
    throw ad::ShapeError(
      "reparameterize: mean " + ad::shape_to_string(mean.shape()) + ", log_var " +
      ad::shape_to_string(log_var.shape()) + ", eps " + ad::shape_to_string(eps.shape()));
  }
  const auto stddev = ad::exp(ad::scale(log_var, 0.5));
  return ad::add(mean, ad::mul(stddev, eps));
}

ad::Var decode(const CvaeConfig & cfg, const BoundParameters & params, ad::Var z, ad::Var social)
{
  check_cvae_params(cfg, params.params());
  require_cols(z, cfg.d_z, "latent sample");
  require_cols(social, cfg.d_y, "social feature");
  const std::array<ad::Var, 2> input{z, social};
  return mlp_forward(cfg.decoder_layout(), params, ad::hstack(input));
}

ad::Var kl_to_standard_normal(ad::Var mean, ad::Var log_var)
{
  // 0.5 * sum(mean^2 + exp(log_var) - log_var - 1)
  const auto inner = ad::sub(ad::add(ad::square(mean), ad::exp(log_var)), log_var);
  return ad::scale(ad::sum(ad::add_scalar(inner, -1.0)), 0.5);
}

ElboTerms elbo_loss(
  const CvaeConfig & cfg, const BoundParameters & params, ad::Var future_disp, ad::Var social,
  ad::Var eps, double beta)
{
  if (!(beta >= 0.0)) {
    throw std::invalid_argument("elbo_loss: beta must be non-negative");
  }
  const auto q = encode(cfg, params, future_disp, social);
  const auto z = reparameterize(q.mean, q.log_var, eps);
  const auto recon = ad::mse(decode(cfg, params, z, social), future_disp);
  const auto kl = kl_to_standard_normal(q.mean, q.log_var);
  return ElboTerms{ad::add(recon, ad::scale(kl, beta)), recon, kl};
}

LatentDistribution encode(
  const CvaeConfig & cfg, const ParameterSet & params, const FutureWindow & future,
  const TrajectoryPoint & last_observed, const SocialFeature & social)
{
  if (future.points.size() != cfg.delta) {
    throw ad::ShapeError(
      "encode: future has " + std::to_string(future.points.size()) + " points, expected " +
      std::to_string(cfg.delta));
  }
  ad::Tape tape;
  const BoundParameters bound(tape, params, false);
  const auto q = encode(cfg, bound,
    tape.constant(ad::Tensor::row(future_displacements(future, last_observed))),
    tape.constant(ad::Tensor::row(social.values)));
  return LatentDistribution{q.mean.value().data(), q.log_var.value().data()};
}

LatentSample reparameterize(const LatentDistribution & dist, std::span<const double> eps)
{
  if (dist.mean.size() != dist.log_var.size() || eps.size() != dist.mean.size()) {
    throw ad::ShapeError(
      "reparameterize: dimension mismatch (mean " + std::to_string(dist.mean.size()) +
      ", log_var " + std::to_string(dist.log_var.size()) + ", eps " + std::to_string(eps.size()) +
      ")");
  }
  LatentSample s;
  s.z.resize(eps.size());
  for (std::size_t j = 0; j < eps.size(); ++j) {
    s.z[j] = dist.mean[j] + std::exp(0.5 * dist.log_var[j]) * eps[j];
  }
  return s;
}

PredictedFuture decode(
  const CvaeConfig & cfg, const ParameterSet & params, const LatentSample & z,
  const SocialFeature & social, const TrajectoryPoint & last_observed)
{
  ad::Tape tape;
  const BoundParameters bound(tape, params, false);
  const auto out = decode(cfg, bound, tape.constant(ad::Tensor::row(z.z)),
    tape.constant(ad::Tensor::row(social.values)));
  return integrate_displacements(out.value().values(), last_observed);
}

double kl_to_standard_normal(const LatentDistribution & dist)
{
  if (dist.mean.size() != dist.log_var.size()) {
    throw ad::ShapeError("kl_to_standard_normal: mean and log_var differ in size");
  }
  double total = 0.0;
  for (std::size_t j = 0; j < dist.mean.size(); ++j) {
    const double lv = dist.log_var[j];
    total += dist.mean[j] * dist.mean[j] + std::exp(lv) - lv - 1.0;
  }
  return 0.5 * total;
}

double elbo_loss(
  const CvaeConfig & cfg, const ParameterSet & params, const Scene & scene,
  const SocialFeature & social, std::span<const double> eps, double beta)
{
  const auto [past, future] = split_target(scene);
  if (future.points.size() != cfg.delta) {
    throw ad::ShapeError("elbo_loss: scene delta differs from model delta");
  }
  ad::Tape tape;
  const BoundParameters bound(tape, params, false);
  const auto terms = elbo_loss(cfg, bound,
    tape.constant(ad::Tensor::row(future_displacements(future, past.last()))),
    tape.constant(ad::Tensor::row(social.values)),
    tape.constant(ad::Tensor::row({eps.begin(), eps.end()})), beta);
  return terms.loss.value().item();
}

std::vector<PredictedFuture> predict(
  const CvaeConfig & cfg, const ParameterSet & params, const SocialFeature & social,
  const TrajectoryPoint & last_observed, std::size_t n_samples, std::uint64_t seed)
{
  if (n_samples == 0) {
    throw std::invalid_argument("predict: n_samples must be at least 1");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<PredictedFuture> out;
  out.reserve(n_samples);
  for (std::size_t s = 0; s < n_samples; ++s) {
    LatentSample z;
    z.z.resize(cfg.d_z);
    for (auto & v : z.z) {
      v = normal(rng);
    }
    out.push_back(decode(cfg, params, z, social, last_observed));
  }
  return out;
}

}  // namespace trajcvae
