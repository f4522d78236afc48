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

#include "trajcvae/scene_io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <stdexcept>

namespace trajcvae
{

using nlohmann::json;

std::string format_real(double value)
{
  if (!std::isfinite(value)) {
    throw FormatError("cannot format non-finite value");
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

namespace
{

std::string quote(const std::string & s)
{
  return json(s).dump();
}

void put_point(std::string & out, const TrajectoryPoint & p)
{
  out += '[';
  out += format_real(p.x);
  out += ',';
  out += format_real(p.y);
  out += ']';
}

void put_points(std::string & out, const std::vector<TrajectoryPoint> & points)
{
  out += '[';
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i > 0) {
      out += ',';
    }
    put_point(out, points[i]);
  }
  out += ']';
}

std::string_view branch_name(Branch b)
{
  return b == Branch::Left ? "left" : "right";
}

// Strict accessors: every failure names the offending field.
class Fields
{
public:
  Fields(const json & obj, std::string context, std::set<std::string> allowed)
  : obj_(obj), context_(std::move(context))
  {
    if (!obj_.is_object()) {
      throw FormatError(context_ + ": expected a JSON object");
    }
    for (const auto & [key, value] : obj_.items()) {
      if (!allowed.count(key)) {
        throw FormatError(context_ + ": unknown field '" + key + "'");
      }
    }
  }

  bool has(const std::string & key) const { return obj_.contains(key); }

  const json & at(const std::string & key) const
  {
    if (!obj_.contains(key)) {
      throw FormatError(context_ + ": missing field '" + key + "'");
    }
    return obj_.at(key);
  }

  std::int64_t integer(const std::string & key) const
  {
    const auto & v = at(key);
    if (!v.is_number_integer()) {
      throw FormatError(context_ + ": field '" + key + "' must be an integer");
    }
    return v.get<std::int64_t>();
  }

  std::size_t count(const std::string & key) const
  {
    const auto v = integer(key);
    if (v < 0) {
      throw FormatError(context_ + ": field '" + key + "' must be non-negative");
    }
    return static_cast<std::size_t>(v);
  }

  double real(const std::string & key) const { return as_real(at(key), key); }

  std::string string(const std::string & key) const
  {
    const auto & v = at(key);
    if (!v.is_string()) {
      throw FormatError(context_ + ": field '" + key + "' must be a string");
    }
    return v.get<std::string>();
  }

  double as_real(const json & v, const std::string & what) const
  {
    if (!v.is_number()) {
      throw FormatError(context_ + ": '" + what + "' must be a number");
    }
    return v.get<double>();
  }

  TrajectoryPoint point(const json & v, const std::string & what) const
  {
    if (!v.is_array() || v.size() != 2) {
      throw FormatError(context_ + ": '" + what + "' must be an [x, y] pair");
    }
    return {as_real(v[0], what), as_real(v[1], what)};
  }

  std::vector<TrajectoryPoint> points(const json & v, const std::string & what) const
  {
    if (!v.is_array()) {
      throw FormatError(context_ + ": '" + what + "' must be an array of points");
    }
    std::vector<TrajectoryPoint> out;
    out.reserve(v.size());
    for (const auto & p : v) {
      out.push_back(point(p, what));
    }
    return out;
  }

  const std::string & context() const { return context_; }

private:
  const json & obj_;
  std::string context_;
};

json parse_json(std::string_view line, const std::string & context)
{
  try {
    return json::parse(line);
  } catch (const json::parse_error & e) {
    throw FormatError(context + ": invalid JSON (" + e.what() + ")");
  }
}

template <typename T, typename Parse>
std::vector<T> read_lines(const std::filesystem::path & path, Parse parse)
{
  const std::string text = read_text_file(path);
  std::vector<T> out;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      out.push_back(parse(line));
    } catch (const SceneError & e) {
      throw SceneError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    } catch (const FormatError & e) {
      throw FormatError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

std::string serialize_scene(const Scene & scene)
{
  std::string out;
  out += "{\"scene_id\":" + std::to_string(scene.scene_id);
  out += ",\"scenario\":" + quote(scene.scenario);
  out += ",\"tau\":" + std::to_string(scene.tau);
  out += ",\"delta\":" + std::to_string(scene.delta);
  out += ",\"dt\":" + format_real(scene.dt);
  out += ",\"target_index\":" + std::to_string(scene.target_index);
  out += ",\"tracks\":[";
  for (std::size_t i = 0; i < scene.tracks.size(); ++i) {
    const auto & t = scene.tracks[i];
    if (i > 0) {
      out += ',';
    }
    out += "{\"agent_id\":" + std::to_string(t.agent_id);
    out += ",\"agent_class\":" + quote(std::string(to_string(t.agent_class)));
    out += ",\"points\":";
    put_points(out, t.points);
    out += '}';
  }
  out += ']';
  if (scene.fork) {
    out += ",\"fork\":{\"branch\":" + quote(std::string(branch_name(scene.fork->taken)));
    out += ",\"left_endpoint\":";
    put_point(out, scene.fork->left_endpoint);
    out += ",\"right_endpoint\":";
    put_point(out, scene.fork->right_endpoint);
    out += '}';
  }
  if (scene.env) {
    out += ",\"env\":[";
    for (std::size_t i = 0; i < scene.env->size(); ++i) {
      if (i > 0) {
        out += ',';
      }
      out += format_real((*scene.env)[i]);
    }
    out += ']';
  }
  if (!scene.frames.empty()) {
    out += ",\"frames\":[";
    for (std::size_t i = 0; i < scene.frames.size(); ++i) {
      if (i > 0) {
        out += ',';
      }
      out += quote(scene.frames[i]);
    }
    out += ']';
  }
  if (scene.seg_map) {
    out += ",\"seg_map\":" + quote(*scene.seg_map);
  }
  out += '}';
  return out;
}

Scene parse_scene(std::string_view line)
{
  const json doc = parse_json(line, "scene");
  const Fields f(doc, "scene", {"scene_id", "scenario", "tau", "delta", "dt", "target_index",
      "tracks", "fork", "env", "frames", "seg_map"});
  Scene scene;
  scene.scene_id = f.integer("scene_id");
  const Fields g(doc, "scene " + std::to_string(scene.scene_id), {"scene_id", "scenario", "tau",
      "delta", "dt", "target_index", "tracks", "fork", "env", "frames", "seg_map"});
  scene.scenario = g.string("scenario");
  scene.tau = g.count("tau");
  scene.delta = g.count("delta");
  scene.dt = g.real("dt");
  scene.target_index = g.count("target_index");

  const auto & tracks = g.at("tracks");
  if (!tracks.is_array()) {
    throw FormatError(g.context() + ": 'tracks' must be an array");
  }
  for (const auto & t : tracks) {
    const Fields tf(t, g.context() + " track", {"agent_id", "agent_class", "points"});
    AgentTrack track;
    track.agent_id = tf.integer("agent_id");
    try {
      track.agent_class = parse_agent_class(tf.string("agent_class"));
    } catch (const std::invalid_argument & e) {
      throw FormatError(g.context() + ": " + e.what());
    }
    track.points = tf.points(tf.at("points"), "points");
    scene.tracks.push_back(std::move(track));
  }

  if (g.has("fork")) {
    const Fields ff(g.at("fork"), g.context() + " fork", {"branch", "left_endpoint", "right_endpoint"});
    ForkInfo fork;
    const auto branch = ff.string("branch");
    if (branch == "left") {
      fork.taken = Branch::Left;
    } else if (branch == "right") {
      fork.taken = Branch::Right;
    } else {
      throw FormatError(g.context() + ": fork branch must be 'left' or 'right', got '" + branch + "'");
    }
    fork.left_endpoint = ff.point(ff.at("left_endpoint"), "left_endpoint");
    fork.right_endpoint = ff.point(ff.at("right_endpoint"), "right_endpoint");
    scene.fork = fork;
  }
  if (g.has("env")) {
    const auto & env = g.at("env");
    if (!env.is_array()) {
      throw FormatError(g.context() + ": 'env' must be an array of numbers");
    }
    std::vector<double> values;
    for (const auto & v : env) {
      values.push_back(g.as_real(v, "env"));
    }
    scene.env = std::move(values);
  }
  if (g.has("frames")) {
    const auto & frames = g.at("frames");
    if (!frames.is_array()) {
      throw FormatError(g.context() + ": 'frames' must be an array of paths");
    }
    for (const auto & v : frames) {
      if (!v.is_string()) {
        throw FormatError(g.context() + ": 'frames' must be an array of paths");
      }
      scene.frames.push_back(v.get<std::string>());
    }
  }
  if (g.has("seg_map")) {
    scene.seg_map = g.string("seg_map");
  }
  validate_scene(scene);
  return scene;
}

std::vector<Scene> read_scenes(const std::filesystem::path & path)
{
  auto scenes = read_lines<Scene>(path, [](const std::string & line) { return parse_scene(line); });
  std::set<std::int64_t> ids;
  for (const auto & s : scenes) {
    if (!ids.insert(s.scene_id).second) {
      throw SceneError(path.string() + ": duplicate scene_id " + std::to_string(s.scene_id));
    }
  }
  return scenes;
}

std::string serialize_scenes(std::span<const Scene> scenes)
{
  std::string out;
  for (const auto & s : scenes) {
    out += serialize_scene(s);
    out += '\n';
  }
  return out;
}

std::string serialize_prediction(const ScenePrediction & prediction)
{
  std::string out = "{\"scene_id\":" + std::to_string(prediction.scene_id) + ",\"samples\":[";
  for (std::size_t i = 0; i < prediction.samples.size(); ++i) {
    if (i > 0) {
      out += ',';
    }
    put_points(out, prediction.samples[i]);
  }
  out += "]}";
  return out;
}

ScenePrediction parse_prediction(std::string_view line)
{
  const json doc = parse_json(line, "prediction");
  const Fields f(doc, "prediction", {"scene_id", "samples"});
  ScenePrediction p;
  p.scene_id = f.integer("scene_id");
  const auto & samples = f.at("samples");
  if (!samples.is_array()) {
    throw FormatError("prediction " + std::to_string(p.scene_id) + ": 'samples' must be an array");
  }
  for (const auto & s : samples) {
    auto points = f.points(s, "samples");
    for (const auto & q : points) {
      if (!std::isfinite(q.x) || !std::isfinite(q.y)) {
        throw FormatError("prediction " + std::to_string(p.scene_id) + ": non-finite point");
      }
    }
    p.samples.push_back(std::move(points));
  }
  return p;
}

std::vector<ScenePrediction> read_predictions(const std::filesystem::path & path)
{
  return read_lines<ScenePrediction>(
    path, [](const std::string & line) { return parse_prediction(line); });
}

std::string serialize_predictions(std::span<const ScenePrediction> predictions)
{
  std::string out;
  for (const auto & p : predictions) {
    out += serialize_prediction(p);
    out += '\n';
  }
  return out;
}

void write_text_file(const std::filesystem::path & path, const std::string & contents)
{
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw FormatError("cannot open '" + tmp.string() + "' for writing");
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) {
      throw FormatError("write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw FormatError("cannot move output into place at '" + path.string() + "'");
  }
}

std::string read_text_file(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open '" + path.string() + "' for reading");
  }
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace trajcvae
