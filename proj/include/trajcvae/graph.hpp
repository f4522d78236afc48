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

#ifndef TRAJCVAE__GRAPH_HPP_
#define TRAJCVAE__GRAPH_HPP_

#include "trajcvae/autodiff.hpp"
#include "trajcvae/nn.hpp"
#include "trajcvae/perception.hpp"
#include "trajcvae/scene.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace trajcvae
{

constexpr std::size_t kEdgeFeatureDim = 4;

struct GraphConfig
{
  std::size_t tau = 8;
  std::size_t d_node = 32;
  std::size_t d_y = 32;
  std::size_t rounds = 2;
  double radius_m = 10.0;
  Activation activation = Activation::Tanh;

  /// Length of the flattened past displacement sequence, 2 * (tau - 1).
  std::size_t past_input_dim() const { return 2 * (tau - 1); }
  /// Width of the learned past encoding; the class one-hot fills the rest of d_node.
  std::size_t past_embed_dim() const { return d_node - kAgentClassCount; }

  void validate() const;
};

/// Raw inputs of one agent node, before the learned encoding.
struct AgentNode
{
  std::int64_t agent_id = 0;
  AgentClass agent_class = AgentClass::Pedestrian;
  /// Per-step displacements (dx, dy) over the past window, flattened.
  std::vector<double> past_displacements;
};

/// Directed edge into the target.
struct GraphEdge
{
  /// Node index: 1..neighbors for agents, neighbors+1 for the environment.
  std::size_t source = 0;
  /// (dx, dy) / radius to the source's last position, then (dvx, dvy) in m/s.
  std::array<double, kEdgeFeatureDim> feature{};
};

/**
 * @brief Star graph around the target agent.
 *
 * Node 0 is the target, nodes 1..n are neighbours in ascending agent_id,
 * node n+1 is the environment. Edges run into the target in node order.
 */
struct InteractionGraph
{
  AgentNode target;
  std::vector<AgentNode> neighbors;
  EnvFeature environment;
  std::vector<GraphEdge> edges;

  std::size_t node_count() const { return neighbors.size() + 2; }
  std::size_t environment_index() const { return neighbors.size() + 1; }
};

struct SocialFeature
{
  std::vector<double> values;

  friend bool operator==(const SocialFeature &, const SocialFeature &) = default;
};

/// Flattened (dx, dy) per step of a past window.
std::vector<double> past_displacements(const PastWindow & past);

/**
 * @brief Collects neighbours within radius_m of the target's last observed position.
 *
 * `pasts` must be index-aligned with scene.tracks.
 */
InteractionGraph build_graph(
  const Scene & scene, std::span<const PastWindow> pasts, const EnvFeature & env, double radius_m);

void init_graph_params(const GraphConfig & cfg, ParameterSet & params, std::mt19937_64 & rng);

/// Throws ShapeError naming the first missing or mis-shaped graph parameter.
void check_graph_params(const GraphConfig & cfg, const ParameterSet & params);

/// Graph inputs recorded on a tape, so features can be differentiated too.
struct GraphTensors
{
  ad::Var target_past;      // 1 x past_input_dim
  ad::Var target_class;     // 1 x 3
  ad::Var neighbor_past;    // n x past_input_dim (invalid when n == 0)
  ad::Var neighbor_class;   // n x 3
  ad::Var environment;      // 1 x 8
  ad::Var edges;            // (n + 1) x 4
  std::size_t neighbor_count = 0;
};

GraphTensors bind_graph(ad::Tape & tape, const InteractionGraph & graph, bool requires_grad = false);

/**
 * @brief Message passing on the star graph; returns y as a 1 x d_y row.
 *
 * Each round, every edge maps (source state, edge feature, target state)
 * through a two-layer perceptron; messages are summed in edge order and the
 * target state updates residually, h += act(W [h, sum] + b). The final
 * state is projected linearly to d_y.
 */
ad::Var message_passing(
  const GraphConfig & cfg, const BoundParameters & params, const GraphTensors & inputs);

SocialFeature message_passing(
  const GraphConfig & cfg, const ParameterSet & params, const InteractionGraph & graph);

}  // namespace trajcvae

#endif  // TRAJCVAE__GRAPH_HPP_
