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

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace trajcvae;

// With beta = 0 and one scene, each 100-epoch window after epoch 200 should not
// average more than 5% above the window before it. Checked on several seeds.
TEST_CASE("loss settles once the KL term is off")
{
  const auto model = ModelConfig::with_defaults(8, 12);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto scenes = generate_synthetic_scenes({Scenario::ConstantVelocity}, 1, 12 + seed);
    TrainConfig cfg;
    cfg.beta = 0.0;
    cfg.epochs = 1000;
    cfg.seed = seed;
    const auto history = train(scenes, model, cfg).loss_history;
    for (double l : history) {
      REQUIRE(std::isfinite(l));
    }
    auto window_mean = [&](std::size_t start) {
      return std::accumulate(history.begin() + start, history.begin() + start + 100, 0.0) / 100.0;
    };
    for (std::size_t start = 300; start + 100 <= history.size(); start += 100) {
      INFO("seed " << seed << ", window starting at epoch " << start);
      CHECK(window_mean(start) <= 1.05 * window_mean(start - 100));
    }
  }
}
