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

#include "trajcvae/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

namespace trajcvae
{

namespace
{

void require_length(const Trajectory & prediction, const FutureWindow & truth)
{
  if (prediction.size() != truth.points.size() || truth.points.empty()) {
    throw std::invalid_argument(
      "prediction has " + std::to_string(prediction.size()) + " points, truth has " +
      std::to_string(truth.points.size()));
  }
}

void require_samples(std::span<const Trajectory> predictions)
{
  if (predictions.empty()) {
    throw std::invalid_argument("best-of-K metrics need at least one prediction");
  }
}

// Runs fn(i) for i in [0, n) on a small worker pool; results go to caller-owned slots.
template <typename Fn>
void parallel_for(std::size_t n, Fn fn)
{
  const std::size_t workers =
    std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) {
              error = std::current_exception();
            }
          }
        }
      });
    }
  }
  if (error) {
    std::rethrow_exception(error);
  }
}

}  // namespace

double average_displacement_error(const Trajectory & prediction, const FutureWindow & truth)
{
  require_length(prediction, truth);
  double total = 0.0;
  for (std::size_t t = 0; t < prediction.size(); ++t) {
    total += distance(prediction[t], truth.points[t]);
  }
  return total / static_cast<double>(prediction.size());
}

double final_displacement_error(const Trajectory & prediction, const FutureWindow & truth)
{
  require_length(prediction, truth);
  return distance(prediction.back(), truth.points.back());
}

double min_ade(std::span<const Trajectory> predictions, const FutureWindow & truth)
{
  require_samples(predictions);
  double best = std::numeric_limits<double>::infinity();
  for (const auto & p : predictions) {
    best = std::min(best, average_displacement_error(p, truth));
  }
  return best;
}

double min_fde(std::span<const Trajectory> predictions, const FutureWindow & truth)
{
  require_samples(predictions);
  double best = std::numeric_limits<double>::infinity();
  for (const auto & p : predictions) {
    best = std::min(best, final_displacement_error(p, truth));
  }
  return best;
}

bool covers_both_branches(
  std::span<const Trajectory> predictions, const ForkInfo & fork, double threshold)
{
  auto reaches = [&](const TrajectoryPoint & endpoint) {
    return std::any_of(predictions.begin(), predictions.end(), [&](const Trajectory & p) {
      return !p.empty() && distance(p.back(), endpoint) < threshold;
    });
  };
  return reaches(fork.left_endpoint) && reaches(fork.right_endpoint);
}

std::uint64_t scene_sample_seed(std::uint64_t seed, std::size_t index)
{
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x5EEDu};
  std::mt19937_64 rng(seq);
  return rng();
}

std::vector<ScenePrediction> predict_scenes(
  std::span<const Scene> scenes, const ModelConfig & model, const ParameterSet & params,
  const EvalOptions & options)
{
  check_model(model, params);
  if (options.k_samples == 0) {
    throw std::invalid_argument("k_samples must be positive");
  }
  std::vector<PreparedScene> prepared;
  prepared.reserve(scenes.size());
  for (const auto & s : scenes) {
    prepared.push_back(prepare_scene(s, model));
  }
  std::vector<ScenePrediction> out(scenes.size());
  parallel_for(scenes.size(), [&](std::size_t i) {
    out[i].scene_id = scenes[i].scene_id;
    if (options.zero_latent) {
      out[i].samples.push_back(predict_mean(model, params, prepared[i]).positions);
      return;
    }
    const auto futures = predict_scene(
      model, params, prepared[i], options.k_samples, scene_sample_seed(options.seed, i));
    for (const auto & f : futures) {
      out[i].samples.push_back(f.positions);
    }
  });
  return out;
}

Metrics evaluate_predictions(
  std::span<const Scene> scenes, std::span<const ScenePrediction> predictions,
  double coverage_threshold_m)
{
  std::map<std::int64_t, const ScenePrediction *> by_id;
  for (const auto & p : predictions) {
    if (!by_id.emplace(p.scene_id, &p).second) {
      throw std::invalid_argument("duplicate predictions for scene " + std::to_string(p.scene_id));
    }
  }
  struct Slot
  {
    double ade = 0.0;
    double fde = 0.0;
    bool fork = false;
    bool covered = false;
  };
  std::vector<Slot> slots(scenes.size());
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const auto it = by_id.find(scenes[i].scene_id);
    if (it == by_id.end()) {
      throw std::invalid_argument("no predictions for scene " + std::to_string(scenes[i].scene_id));
    }
  }
  parallel_for(scenes.size(), [&](std::size_t i) {
    const auto & scene = scenes[i];
    const auto & samples = by_id.at(scene.scene_id)->samples;
    const auto future = split_target(scene).second;
    slots[i].ade = min_ade(samples, future);
    slots[i].fde = min_fde(samples, future);
    if (scene.fork) {
      slots[i].fork = true;
      slots[i].covered = covers_both_branches(samples, *scene.fork, coverage_threshold_m);
    }
  });

  Metrics m;
  m.scenes = scenes.size();
  if (scenes.empty()) {
    return m;
  }
  std::size_t covered = 0;
  for (const auto & s : slots) {
    m.min_ade += s.ade;
    m.min_fde += s.fde;
    m.fork_scenes += s.fork ? 1 : 0;
    covered += s.covered ? 1 : 0;
  }
  m.min_ade /= static_cast<double>(scenes.size());
  m.min_fde /= static_cast<double>(scenes.size());
  if (m.fork_scenes > 0) {
    m.mode_coverage = static_cast<double>(covered) / static_cast<double>(m.fork_scenes);
  }
  return m;
}

Metrics evaluate(
  std::span<const Scene> scenes, const ModelConfig & model, const ParameterSet & params,
  const EvalOptions & options)
{
  const auto predictions = predict_scenes(scenes, model, params, options);
  return evaluate_predictions(scenes, predictions, options.coverage_threshold_m);
}

}  // namespace trajcvae
