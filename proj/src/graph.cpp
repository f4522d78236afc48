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

#include "trajcvae/graph.hpp"

#include <algorithm>
#include <string>

namespace trajcvae
{

namespace
{

const char * const kPastEncoder = "graph.past_encoder";
const char * const kEnvEncoder = "graph.env_encoder";
const char * const kUpdate = "graph.update";
const char * const kProjection = "graph.projection";

std::string weight(const char * prefix) { return std::string(prefix) + ".weight"; }
std::string bias(const char * prefix) { return std::string(prefix) + ".bias"; }

MlpLayout message_layout(const GraphConfig & cfg)
{
  const std::size_t in = 2 * cfg.d_node + kEdgeFeatureDim;
  return MlpLayout{"graph.message", {in, cfg.d_node, cfg.d_node}, cfg.activation, cfg.activation};
}

std::array<double, kAgentClassCount> one_hot(AgentClass c)
{
  std::array<double, kAgentClassCount> v{};
  v[static_cast<std::size_t>(c)] = 1.0;
  return v;
}

}  // namespace

void GraphConfig::validate() const
{
  if (tau < 2) {
    throw std::invalid_argument("graph config: tau must be at least 2");
  }
  if (d_node <= kAgentClassCount) {
    throw std::invalid_argument("graph config: d_node must exceed the agent class count (3)");
  }
  if (d_y == 0 || rounds == 0) {
    throw std::invalid_argument("graph config: d_y and rounds must be positive");
  }
  if (!(radius_m > 0.0)) {
    throw std::invalid_argument("graph config: radius_m must be positive");
  }
}

std::vector<double> past_displacements(const PastWindow & past)
{
  std::vector<double> out;
  out.reserve(2 * (past.points.size() - 1));
  for (std::size_t t = 1; t < past.points.size(); ++t) {
    out.push_back(past.points[t].x - past.points[t - 1].x);
    out.push_back(past.points[t].y - past.points[t - 1].y);
  }
  return out;
}

InteractionGraph build_graph(
  const Scene & scene, std::span<const PastWindow> pasts, const EnvFeature & env, double radius_m)
{
  if (scene.target_index >= scene.tracks.size()) {
    throw SceneError(
      "build_graph: target index " + std::to_string(scene.target_index) + " out of range for " +
      std::to_string(scene.tracks.size()) + " tracks");
  }
  if (pasts.size() != scene.tracks.size()) {
    throw SceneError("build_graph: past windows do not cover every agent");
  }
  if (!(radius_m > 0.0)) {
    throw SceneError("build_graph: radius must be positive");
  }
  for (const auto & past : pasts) {
    if (past.points.size() != scene.tau) {
      throw SceneError("build_graph: past window length differs from tau");
    }
  }

  const auto & target_past = pasts[scene.target_index];
  const auto & anchor = target_past.last();
  const double dt = scene.dt;
  auto velocity = [dt](const PastWindow & p) {
    const auto & a = p.points[p.points.size() - 2];
    const auto & b = p.points.back();
    return TrajectoryPoint{(b.x - a.x) / dt, (b.y - a.y) / dt};
  };
  const auto target_vel = velocity(target_past);

  InteractionGraph graph;
  graph.target = AgentNode{scene.target().agent_id, scene.target().agent_class,
    past_displacements(target_past)};
  graph.environment = env;

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < scene.tracks.size(); ++i) {
    if (i != scene.target_index && distance(pasts[i].last(), anchor) <= radius_m) {
      order.push_back(i);
    }
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scene.tracks[a].agent_id < scene.tracks[b].agent_id;
  });

  for (std::size_t i : order) {
    const auto & track = scene.tracks[i];
    graph.neighbors.push_back(
      AgentNode{track.agent_id, track.agent_class, past_displacements(pasts[i])});
    const auto & last = pasts[i].last();
    const auto vel = velocity(pasts[i]);
    graph.edges.push_back(GraphEdge{graph.neighbors.size(),
      {(last.x - anchor.x) / radius_m, (last.y - anchor.y) / radius_m, vel.x - target_vel.x,
        vel.y - target_vel.y}});
  }
  // The environment is pooled at the target's position: zero offset, no velocity.
  graph.edges.push_back(GraphEdge{graph.environment_index(), {}});
  return graph;
}

void init_graph_params(const GraphConfig & cfg, ParameterSet & params, std::mt19937_64 & rng)
{
  cfg.validate();
  params.add(weight(kPastEncoder), glorot_uniform(cfg.past_input_dim(), cfg.past_embed_dim(), rng));
  params.add(bias(kPastEncoder), ad::Tensor::zeros({1, cfg.past_embed_dim()}));
  params.add(weight(kEnvEncoder), glorot_uniform(kEnvFeatureDim, cfg.d_node, rng));
  params.add(bias(kEnvEncoder), ad::Tensor::zeros({1, cfg.d_node}));
  init_mlp(message_layout(cfg), params, rng);
  params.add(weight(kUpdate), glorot_uniform(2 * cfg.d_node, cfg.d_node, rng));
  params.add(bias(kUpdate), ad::Tensor::zeros({1, cfg.d_node}));
  params.add(weight(kProjection), glorot_uniform(cfg.d_node, cfg.d_y, rng));
  params.add(bias(kProjection), ad::Tensor::zeros({1, cfg.d_y}));
}

void check_graph_params(const GraphConfig & cfg, const ParameterSet & params)
{
  cfg.validate();
  require_shape(params, weight(kPastEncoder), {cfg.past_input_dim(), cfg.past_embed_dim()});
  require_shape(params, bias(kPastEncoder), {1, cfg.past_embed_dim()});
  require_shape(params, weight(kEnvEncoder), {kEnvFeatureDim, cfg.d_node});
  require_shape(params, bias(kEnvEncoder), {1, cfg.d_node});
  check_mlp(message_layout(cfg), params);
  require_shape(params, weight(kUpdate), {2 * cfg.d_node, cfg.d_node});
  require_shape(params, bias(kUpdate), {1, cfg.d_node});
  require_shape(params, weight(kProjection), {cfg.d_node, cfg.d_y});
  require_shape(params, bias(kProjection), {1, cfg.d_y});
}

GraphTensors bind_graph(ad::Tape & tape, const InteractionGraph & graph, bool requires_grad)
{
  const std::size_t past_dim = graph.target.past_displacements.size();
  if (past_dim == 0) {
    throw SceneError("bind_graph: empty past encoding");
  }
  auto class_row = [](AgentClass c) {
    const auto h = one_hot(c);
    return std::vector<double>(h.begin(), h.end());
  };

  GraphTensors t;
  t.neighbor_count = graph.neighbors.size();
  t.target_past = tape.leaf(ad::Tensor::row(graph.target.past_displacements), requires_grad);
  t.target_class = tape.leaf(ad::Tensor::row(class_row(graph.target.agent_class)), requires_grad);
  if (t.neighbor_count > 0) {
    std::vector<double> past, cls;
    for (const auto & n : graph.neighbors) {
      if (n.past_displacements.size() != past_dim) {
        throw SceneError("bind_graph: inconsistent past encoding length");
      }
      past.insert(past.end(), n.past_displacements.begin(), n.past_displacements.end());
      const auto row = class_row(n.agent_class);
      cls.insert(cls.end(), row.begin(), row.end());
    }
    t.neighbor_past =
      tape.leaf(ad::Tensor::matrix(t.neighbor_count, past_dim, std::move(past)), requires_grad);
    t.neighbor_class = tape.leaf(
      ad::Tensor::matrix(t.neighbor_count, kAgentClassCount, std::move(cls)), requires_grad);
  }
  t.environment = tape.leaf(
    ad::Tensor::row({graph.environment.values.begin(), graph.environment.values.end()}),
    requires_grad);
  std::vector<double> edges;
  for (const auto & e : graph.edges) {
    edges.insert(edges.end(), e.feature.begin(), e.feature.end());
  }
  t.edges = tape.leaf(
    ad::Tensor::matrix(graph.edges.size(), kEdgeFeatureDim, std::move(edges)), requires_grad);
  if (graph.edges.size() != t.neighbor_count + 1) {
    throw SceneError("bind_graph: edge count does not match node count");
  }
  return t;
}

ad::Var message_passing(
  const GraphConfig & cfg, const BoundParameters & params, const GraphTensors & in)
{
  check_graph_params(cfg, params.params());
  if (in.target_past.value().cols() != cfg.past_input_dim()) {
    throw ad::ShapeError(
      "message_passing: past encoding has " + std::to_string(in.target_past.value().cols()) +
      " values, expected 2*(tau-1)=" + std::to_string(cfg.past_input_dim()));
  }
  const auto act = cfg.activation;
  auto encode_agents = [&](ad::Var past, ad::Var cls) {
    const auto embed =
      activate(ad::affine(past, params[weight(kPastEncoder)], params[bias(kPastEncoder)]), act);
    const std::array<ad::Var, 2> parts{embed, cls};
    return ad::hstack(parts);
  };

  ad::Var state = encode_agents(in.target_past, in.target_class);
  const ad::Var env =
    activate(ad::affine(in.environment, params[weight(kEnvEncoder)], params[bias(kEnvEncoder)]), act);
  ad::Var sources = env;
  if (in.neighbor_count > 0) {
    const std::array<ad::Var, 2> rows{encode_agents(in.neighbor_past, in.neighbor_class), env};
    sources = ad::vstack(rows);
  }
  const std::size_t edge_count = in.neighbor_count + 1;
  const auto layout = message_layout(cfg);

  for (std::size_t round = 0; round < cfg.rounds; ++round) {
    const std::array<ad::Var, 3> parts{sources, in.edges, ad::tile_rows(state, edge_count)};
    const ad::Var messages = mlp_forward(layout, params, ad::hstack(parts));
    const std::array<ad::Var, 2> update_in{state, ad::sum_rows(messages)};
    const ad::Var delta = activate(
      ad::affine(ad::hstack(update_in), params[weight(kUpdate)], params[bias(kUpdate)]), act);
    state = ad::add(state, delta);
  }
  return ad::affine(state, params[weight(kProjection)], params[bias(kProjection)]);
}

SocialFeature message_passing(
  const GraphConfig & cfg, const ParameterSet & params, const InteractionGraph & graph)
{
  ad::Tape tape;
  const BoundParameters bound(tape, params, false);
  const auto inputs = bind_graph(tape, graph);
  const auto y = message_passing(cfg, bound, inputs);
  return SocialFeature{y.value().data()};
}

}  // namespace trajcvae
