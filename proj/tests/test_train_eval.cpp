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

#include "trajcvae/metrics.hpp"
#include "trajcvae/train.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace trajcvae;

namespace
{

ModelConfig small_model(std::size_t tau = 8, std::size_t delta = 12)
{
  auto cfg = ModelConfig::with_defaults(tau, delta);
  cfg.graph.d_node = 8;
  cfg.graph.d_y = 6;
  cfg.cvae.d_y = 6;
  cfg.cvae.encoder_hidden = {12};
  cfg.cvae.decoder_hidden = {12};
  return cfg;
}

Trajectory shifted(const FutureWindow & truth, double dx, double dy)
{
  Trajectory t;
  for (const auto & p : truth.points) {
    t.push_back({p.x + dx, p.y + dy});
  }
  return t;
}

FutureWindow straight(std::size_t n)
{
  FutureWindow f;
  for (std::size_t i = 0; i < n; ++i) {
    f.points.push_back({static_cast<double>(i), 2.0});
  }
  return f;
}

}  // namespace

TEST_CASE("displacement metrics")
{
  const auto truth = straight(12);
  const std::vector<Trajectory> exact{truth.points};
  CHECK(min_ade(exact, truth) == 0.0);
  CHECK(min_fde(exact, truth) == 0.0);

  const std::vector<Trajectory> offset{shifted(truth, 1.0, 0.0)};
  CHECK(min_ade(offset, truth) == 1.0);

  auto end_off = truth.points;
  end_off.back().x += 3.0;
  end_off.back().y += 4.0;
  const std::vector<Trajectory> end{end_off};
  CHECK(min_fde(end, truth) == 5.0);

  const std::vector<Trajectory> pair{shifted(truth, 0.0, 2.0), shifted(truth, 0.0, -0.5)};
  CHECK(min_ade(pair, truth) == 0.5);
  CHECK(min_fde(pair, truth) == 0.5);

  CHECK_THROWS(min_ade(std::vector<Trajectory>{}, truth));
  CHECK_THROWS(min_fde(std::vector<Trajectory>{}, truth));
  const std::vector<Trajectory> short_one{Trajectory(11)};
  CHECK_THROWS(min_ade(short_one, truth));
  CHECK_THROWS(min_fde(short_one, truth));
}

TEST_CASE("best-of-K properties")
{
  std::mt19937_64 rng(51);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto delta = test::random_size(rng, 1, 12);
    FutureWindow truth;
    for (std::size_t i = 0; i < delta; ++i) {
      truth.points.push_back({n(rng), n(rng)});
    }
    std::vector<Trajectory> samples(test::random_size(rng, 1, 8));
    for (auto & s : samples) {
      for (std::size_t i = 0; i < delta; ++i) {
        s.push_back({truth.points[i].x + n(rng), truth.points[i].y + n(rng)});
      }
    }
    const double ade = min_ade(samples, truth);
    const double fde = min_fde(samples, truth);
    std::size_t best_fde = 0;
    for (std::size_t k = 0; k < samples.size(); ++k) {
      CHECK(ade <= average_displacement_error(samples[k], truth));
      if (final_displacement_error(samples[k], truth) < final_displacement_error(samples[best_fde], truth)) {
        best_fde = k;
      }
    }
    double worst_point = 0.0;
    for (std::size_t i = 0; i < delta; ++i) {
      worst_point = std::max(worst_point, distance(samples[best_fde][i], truth.points[i]));
    }
    CHECK(fde <= worst_point);

    auto dup = samples;
    dup.push_back(samples[test::random_size(rng, 0, samples.size() - 1)]);
    CHECK(min_ade(dup, truth) == ade);
    CHECK(min_fde(dup, truth) == fde);
  }
}

TEST_CASE("branch coverage")
{
  const ForkInfo fork{Branch::Left, {0.0, 10.0}, {10.0, 10.0}};
  const std::vector<Trajectory> both{{{0.3, 9.9}}, {{10.0, 10.4}}};
  CHECK(covers_both_branches(both, fork, 0.5));
  const std::vector<Trajectory> one{{{0.3, 9.9}}, {{0.0, 10.0}}};
  CHECK_FALSE(covers_both_branches(one, fork, 0.5));
  // The threshold is strict.
  const std::vector<Trajectory> edge{{{0.5, 10.0}}, {{10.0, 10.0}}};
  CHECK_FALSE(covers_both_branches(edge, fork, 0.5));
}

TEST_CASE("evaluating an oracle predictor gives zero error")
{
  const auto scenes = generate_synthetic_scenes({Scenario::Fork}, 10, 4);
  std::vector<ScenePrediction> predictions;
  for (const auto & s : scenes) {
    predictions.push_back({s.scene_id, {split_target(s).second.points}});
  }
  const auto m = evaluate_predictions(scenes, predictions);
  CHECK(m.min_ade == 0.0);
  CHECK(m.min_fde == 0.0);
  CHECK(m.scenes == 10);
  CHECK(m.fork_scenes == 10);
  REQUIRE(m.mode_coverage.has_value());
  CHECK(*m.mode_coverage == 0.0);

  auto missing = predictions;
  missing.pop_back();
  CHECK_THROWS(evaluate_predictions(scenes, missing));
  auto empty = predictions;
  empty[3].samples.clear();
  CHECK_THROWS(evaluate_predictions(scenes, empty));
  auto duplicated = predictions;
  duplicated.push_back(predictions[0]);
  CHECK_THROWS(evaluate_predictions(scenes, duplicated));
}

TEST_CASE("an untrained zero model predicts the target standing still")
{
  const auto scenes = generate_synthetic_scenes({Scenario::ConstantVelocity}, 25, 9);
  const auto model = small_model();
  auto params = init_model(model, 1);
  params.zero();
  double expect = 0.0;
  for (const auto & s : scenes) {
    const auto [past, future] = split_target(s);
    expect += distance(past.last(), future.points.back());
  }
  expect /= static_cast<double>(scenes.size());
  REQUIRE(expect > 1.0);
  const auto m = evaluate(scenes, model, params, EvalOptions{});
  CHECK(m.min_fde == doctest::Approx(expect).epsilon(1e-12));
  CHECK_FALSE(m.mode_coverage.has_value());
}

TEST_CASE("evaluation is deterministic and shaped by the options")
{
  const auto scenes = generate_synthetic_scenes({Scenario::Fork}, 12, 5);
  const auto model = small_model();
  const auto params = init_model(model, 2);
  EvalOptions opts;
  opts.k_samples = 7;
  opts.seed = 3;
  const auto a = predict_scenes(scenes, model, params, opts);
  CHECK(a == predict_scenes(scenes, model, params, opts));
  REQUIRE(a.size() == 12);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].scene_id == scenes[i].scene_id);
    CHECK(a[i].samples.size() == 7);
    CHECK(a[i].samples[0].size() == 12);
  }
  opts.zero_latent = true;
  const auto mean = predict_scenes(scenes, model, params, opts);
  CHECK(mean[0].samples.size() == 1);

  const auto m1 = evaluate(scenes, model, params, EvalOptions{});
  const auto m2 = evaluate(scenes, model, params, EvalOptions{});
  CHECK(m1.min_ade == m2.min_ade);
  CHECK(m1.min_fde == m2.min_fde);
  CHECK(m1.mode_coverage == m2.mode_coverage);
  CHECK(m1.min_ade >= 0.0);
  CHECK(*m1.mode_coverage >= 0.0);
  CHECK(*m1.mode_coverage <= 1.0);
}

TEST_CASE("training with a zero learning rate leaves parameters alone")
{
  const auto scenes = generate_synthetic_scenes({Scenario::Avoidance}, 3, 6);
  const auto model = small_model();
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.epochs = 4;
  cfg.seed = 11;
  const auto r = train(scenes, model, cfg);
  CHECK(r.params == init_model(model, 11));
  REQUIRE(r.loss_history.size() == 4);

  // Each epoch's loss is the mean ELBO at the unchanged parameters under that epoch's eps.
  EpsStream eps(11, model.cvae.d_z);
  for (std::size_t e = 0; e < 4; ++e) {
    double total = 0.0;
    for (const auto & s : scenes) {
      const auto prepared = prepare_scene(s, model);
      ad::Tape tape;
      const BoundParameters bound(tape, r.params, false);
      total += pipeline_loss(model, bound, prepared, eps.next(), cfg.beta).loss.value().item();
    }
    CHECK(r.loss_history[e] == doctest::Approx(total / 3.0).epsilon(1e-14));
  }

  // With no dependence on the latent the history is exactly constant.
  auto zero = init_model(model, 11);
  zero.zero();
  const auto flat = train(scenes, model, cfg, zero);
  for (double l : flat.loss_history) {
    CHECK(l == flat.loss_history[0]);
  }
}

TEST_CASE("training is deterministic given the seed")
{
  const auto scenes = generate_synthetic_scenes({Scenario::Fork}, 4, 7);
  const auto model = small_model();
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.seed = 4;
  const auto a = train(scenes, model, cfg);
  const auto b = train(scenes, model, cfg);
  CHECK(a.loss_history == b.loss_history);
  CHECK(a.params == b.params);
  cfg.seed = 5;
  CHECK(train(scenes, model, cfg).loss_history != a.loss_history);

  cfg.update = UpdateMode::PerEpoch;
  const auto c = train(scenes, model, cfg);
  CHECK(c.loss_history == train(scenes, model, cfg).loss_history);
}

TEST_CASE("training reports every epoch")
{
  const auto scenes = generate_synthetic_scenes({Scenario::ConstantVelocity}, 2, 8);
  TrainConfig cfg;
  cfg.epochs = 3;
  std::vector<std::size_t> seen;
  const auto r = train(scenes, small_model(), cfg, std::nullopt,
    [&](std::size_t epoch, double loss, const ParameterSet &) {
      seen.push_back(epoch);
      CHECK(std::isfinite(loss));
    });
  CHECK(seen == std::vector<std::size_t>{0, 1, 2});
  CHECK(r.loss_history.size() == 3);
}

TEST_CASE("training input checks")
{
  const auto model = small_model();
  TrainConfig cfg;
  cfg.epochs = 1;
  CHECK_THROWS(train(std::vector<Scene>{}, model, cfg));
  auto scenes = generate_synthetic_scenes({Scenario::ConstantVelocity}, 2, 8);
  scenes[1] = generate_synthetic_scene({Scenario::ConstantVelocity, 6, 12}, 8, 1);
  CHECK_THROWS_AS(train(scenes, model, cfg), SceneError);

  // Overflowing parameters trip the non-finite guard instead of training on NaN.
  auto huge = init_model(model, 0);
  for (auto & e : huge.entries()) {
    for (auto & v : e.tensor.values()) {
      v = 1e300;
    }
  }
  CHECK_THROWS_AS(train(std::span(scenes).first(1), model, cfg, huge), ad::NonFiniteError);
  CHECK(parse_update_mode("epoch") == UpdateMode::PerEpoch);
  CHECK(to_string(UpdateMode::PerScene) == "scene");
  CHECK_THROWS(parse_update_mode("batch"));
}

TEST_CASE("a single constant-velocity scene is fitted")
{
  const auto scenes = generate_synthetic_scenes({Scenario::ConstantVelocity}, 1, 7);
  TrainConfig cfg;
  cfg.epochs = 2000;
  const auto r = train(scenes, ModelConfig::with_defaults(8, 12), cfg);
  CHECK(r.loss_history.back() < 1e-3);
}

TEST_CASE("Adam's first step moves each parameter by the learning rate against the gradient sign")
{
  ParameterSet p;
  p.add("w", ad::Tensor::matrix(1, 3, {1.0, -2.0, 0.5}));
  Adam adam(p, 0.01, 0.9, 0.999, 1e-8);
  const std::vector<ad::Tensor> g{ad::Tensor::matrix(1, 3, {4.0, -1e-3, 0.0})};
  adam.step(p, g);
  // Bias-corrected moments: m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps).
  CHECK(p.at("w")[0] == doctest::Approx(1.0 - 0.01 * 4.0 / (4.0 + 1e-8)).epsilon(1e-15));
  CHECK(p.at("w")[1] == doctest::Approx(-2.0 + 0.01 * 1e-3 / (1e-3 + 1e-8)).epsilon(1e-15));
  CHECK(p.at("w")[2] == 0.5);
  CHECK(adam.steps() == 1);
}
