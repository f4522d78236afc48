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

#ifndef TRAJCVAE__NN_HPP_
#define TRAJCVAE__NN_HPP_

#include "trajcvae/autodiff.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace trajcvae
{

enum class Activation { Tanh, Identity };

Activation parse_activation(std::string_view name);
std::string_view to_string(Activation act);

ad::Var activate(ad::Var x, Activation act);

/// Named parameter tensors in insertion order. The order is the checkpoint order.
class ParameterSet
{
public:
  struct Entry
  {
    std::string name;
    ad::Tensor tensor;

    friend bool operator==(const Entry &, const Entry &) = default;
  };

  void add(std::string name, ad::Tensor tensor);
  bool contains(std::string_view name) const;
  const ad::Tensor & at(std::string_view name) const;
  ad::Tensor & at(std::string_view name);

  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;
  const std::vector<Entry> & entries() const { return entries_; }
  std::vector<Entry> & entries() { return entries_; }

  /// Every tensor set to zero.
  void zero();

  friend bool operator==(const ParameterSet &, const ParameterSet &) = default;

private:
  std::vector<Entry> entries_;
};

/// A ParameterSet recorded as leaves on one tape.
class BoundParameters
{
public:
  BoundParameters(ad::Tape & tape, const ParameterSet & params, bool requires_grad = true);

  ad::Var operator[](std::string_view name) const;
  const std::vector<ad::Var> & vars() const { return vars_; }
  const ParameterSet & params() const { return *params_; }

  /// Same names as `params`, values taken from an existing set of leaves.
  BoundParameters(const ParameterSet & params, std::vector<ad::Var> vars);

private:
  const ParameterSet * params_;
  std::vector<ad::Var> vars_;
};

/// Checks that `name` exists with the given shape; throws naming the parameter otherwise.
void require_shape(const ParameterSet & params, std::string_view name, const ad::Shape & shape);

/**
 * @brief Layer sizes of a perceptron stored as "<prefix>.<i>.weight" / "<prefix>.<i>.bias".
 *
 * Hidden layers use `hidden_activation`; the output layer uses `output_activation`.
 */
struct MlpLayout
{
  std::string prefix;
  std::vector<std::size_t> sizes;  // input, hidden..., output
  Activation hidden_activation = Activation::Tanh;
  Activation output_activation = Activation::Identity;

  std::size_t layers() const { return sizes.size() - 1; }
  std::string weight_name(std::size_t layer) const;
  std::string bias_name(std::size_t layer) const;
};

/// Adds Glorot-uniform weights and zero biases for every layer.
void init_mlp(const MlpLayout & layout, ParameterSet & params, std::mt19937_64 & rng);
void check_mlp(const MlpLayout & layout, const ParameterSet & params);
ad::Var mlp_forward(const MlpLayout & layout, const BoundParameters & params, ad::Var x);

ad::Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64 & rng);

}  // namespace trajcvae

#endif  // TRAJCVAE__NN_HPP_
