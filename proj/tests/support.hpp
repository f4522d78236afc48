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

// Small helpers shared by the unit tests.

#ifndef TRAJCVAE_TESTS__SUPPORT_HPP_
#define TRAJCVAE_TESTS__SUPPORT_HPP_

#include "trajcvae/autodiff.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace trajcvae::test
{

inline ad::Tensor random_tensor(std::mt19937_64 & rng, std::size_t rows, std::size_t cols, double scale = 1.0)
{
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> v(rows * cols);
  for (auto & x : v) {
    x = u(rng);
  }
  return ad::Tensor::matrix(rows, cols, std::move(v));
}

inline std::size_t random_size(std::mt19937_64 & rng, std::size_t lo, std::size_t hi)
{
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string & name)
{
  const auto dir = std::filesystem::temp_directory_path() / ("trajcvae_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace trajcvae::test

#endif  // TRAJCVAE_TESTS__SUPPORT_HPP_
