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

#ifndef TRAJCVAE__RUN_CONFIG_HPP_
#define TRAJCVAE__RUN_CONFIG_HPP_

#include "trajcvae/model.hpp"
#include "trajcvae/train.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace trajcvae
{

/// Configuration error carrying the offending key and 1-based line (0 when not line-bound).
class ConfigError : public std::invalid_argument
{
public:
  ConfigError(const std::string & message, std::string key, std::size_t line)
  : std::invalid_argument(message), key_(std::move(key)), line_(line)
  {
  }

  const std::string & key() const { return key_; }
  std::size_t line() const { return line_; }

private:
  std::string key_;
  std::size_t line_;
};

/**
 * @brief Everything a training run needs, read from a flat `key = value` file.
 *
 * Keys: the TrainConfig fields (learning_rate, epochs, beta, k_samples, seed,
 * adam_beta1, adam_beta2, adam_eps, update), model dims (tau, delta, d_node,
 * d_y, d_z, rounds, radius_m, encoder_hidden, decoder_hidden, activation),
 * flow settings (flow_alpha, flow_iterations, pool_radius_m) and the paths
 * scenes, checkpoint, loss_csv. Relative paths resolve against the directory
 * of the config file.
 */
struct RunConfig
{
  TrainConfig train;
  ModelConfig model = ModelConfig::with_defaults(8, 12);
  double flow_alpha = 0.1;
  int flow_iterations = 200;
  double pool_radius_m = 2.0;
  std::string scenes;
  std::string checkpoint;
  std::string loss_csv;

  void validate() const;
};

/// Parses config text. `origin` prefixes error messages (usually the file path).
RunConfig parse_run_config(std::string_view text, std::string_view origin = "config");
RunConfig load_run_config(const std::filesystem::path & path);

/// Canonical text form; parse_run_config(to_text(c)) reproduces c.
std::string to_text(const RunConfig & config);

/// Only the model keys, in canonical order.
std::string model_config_text(const ModelConfig & model);
ModelConfig parse_model_config(std::string_view text);

}  // namespace trajcvae

#endif  // TRAJCVAE__RUN_CONFIG_HPP_
