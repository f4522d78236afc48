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

#include "trajcvae/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace trajcvae
{

Activation parse_activation(std::string_view name)
{
  if (name == "tanh") {
    return Activation::Tanh;
  }
  if (name == "identity") {
    return Activation::Identity;
  }
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(Activation act)
{
  return act == Activation::Tanh ? "tanh" : "identity";
}

ad::Var activate(ad::Var x, Activation act)
{
  return act == Activation::Tanh ? ad::tanh(x) : x;
}

void ParameterSet::add(std::string name, ad::Tensor tensor)
{
  if (contains(name)) {
    throw std::invalid_argument("duplicate parameter '" + name + "'");
  }
  entries_.push_back(Entry{std::move(name), std::move(tensor)});
}

bool ParameterSet::contains(std::string_view name) const
{
  return std::any_of(
    entries_.begin(), entries_.end(), [&](const Entry & e) { return e.name == name; });
}

const ad::Tensor & ParameterSet::at(std::string_view name) const
{
  for (const auto & e : entries_) {
    if (e.name == name) {
      return e.tensor;
    }
  }
  throw std::out_of_range("missing parameter '" + std::string(name) + "'");
}

ad::Tensor & ParameterSet::at(std::string_view name)
{
  return const_cast<ad::Tensor &>(std::as_const(*this).at(name));
}

std::size_t ParameterSet::scalar_count() const
{
  std::size_t n = 0;
  for (const auto & e : entries_) {
    n += e.tensor.size();
  }
  return n;
}

void ParameterSet::zero()
{
  for (auto & e : entries_) {
    std::fill(e.tensor.values().begin(), e.tensor.values().end(), 0.0);
  }
}

BoundParameters::BoundParameters(ad::Tape & tape, const ParameterSet & params, bool requires_grad)
: params_(&params)
{
  vars_.reserve(params.size());
  for (const auto & e : params.entries()) {
    vars_.push_back(tape.leaf(e.tensor, requires_grad));
  }
}

BoundParameters::BoundParameters(const ParameterSet & params, std::vector<ad::Var> vars)
: params_(&params), vars_(std::move(vars))
{
  if (vars_.size() != params.size()) {
    throw std::invalid_argument("BoundParameters: variable count does not match parameter set");
  }
}

ad::Var BoundParameters::operator[](std::string_view name) const
{
  const auto & entries = params_->entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].name == name) {
      return vars_[i];
    }
  }
  throw std::out_of_range("missing parameter '" + std::string(name) + "'");
}

void require_shape(const ParameterSet & params, std::string_view name, const ad::Shape & shape)
{
  if (!params.contains(name)) {
    throw ad::ShapeError("missing parameter '" + std::string(name) + "'");
  }
  const auto & actual = params.at(name).shape();
  if (actual != shape) {
    throw ad::ShapeError(
      "parameter '" + std::string(name) + "' has shape " + ad::shape_to_string(actual) +
      ", expected " + ad::shape_to_string(shape));
  }
}

std::string MlpLayout::weight_name(std::size_t layer) const
{
  return prefix + "." + std::to_string(layer) + ".weight";
}

std::string MlpLayout::bias_name(std::size_t layer) const
{
  return prefix + "." + std::to_string(layer) + ".bias";
}

ad::Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64 & rng)
{
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  std::vector<double> w(fan_in * fan_out);
  for (auto & v : w) {
    v = dist(rng);
  }
  return ad::Tensor::matrix(fan_in, fan_out, std::move(w));
}

void init_mlp(const MlpLayout & layout, ParameterSet & params, std::mt19937_64 & rng)
{
  for (std::size_t l = 0; l < layout.layers(); ++l) {
    params.add(layout.weight_name(l), glorot_uniform(layout.sizes[l], layout.sizes[l + 1], rng));
    params.add(layout.bias_name(l), ad::Tensor::zeros({1, layout.sizes[l + 1]}));
  }
}

void check_mlp(const MlpLayout & layout, const ParameterSet & params)
{
  if (layout.sizes.size() < 2) {
    throw std::invalid_argument(layout.prefix + ": perceptron needs at least one layer");
  }
  for (std::size_t l = 0; l < layout.layers(); ++l) {
    require_shape(params, layout.weight_name(l), {layout.sizes[l], layout.sizes[l + 1]});
    require_shape(params, layout.bias_name(l), {1, layout.sizes[l + 1]});
  }
}

ad::Var mlp_forward(const MlpLayout & layout, const BoundParameters & params, ad::Var x)
{
  for (std::size_t l = 0; l < layout.layers(); ++l) {
    x = ad::affine(x, params[layout.weight_name(l)], params[layout.bias_name(l)]);
    const bool last = l + 1 == layout.layers();
    x = activate(x, last ? layout.output_activation : layout.hidden_activation);
  }
  return x;
}

}  // namespace trajcvae
