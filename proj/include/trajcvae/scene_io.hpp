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

#ifndef TRAJCVAE__SCENE_IO_HPP_
#define TRAJCVAE__SCENE_IO_HPP_

#include "trajcvae/grid_io.hpp"
#include "trajcvae/metrics.hpp"
#include "trajcvae/scene.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace trajcvae
{

/// Canonical real formatting used by every text output: printf "%.9g".
std::string format_real(double value);

/**
 * @brief One scene as a single JSON object, fields in canonical order.
 *
 * scene_id, scenario, tau, delta, dt, target_index, tracks, then the optional
 * fork, env, frames and seg_map. Absent optionals are omitted. No newline.
 */
std::string serialize_scene(const Scene & scene);

/// Parses and validates one scene line. Unknown or mistyped fields are errors.
Scene parse_scene(std::string_view line);

/// Reads a JSON-lines scene file; errors carry "path:line".
std::vector<Scene> read_scenes(const std::filesystem::path & path);
std::string serialize_scenes(std::span<const Scene> scenes);

/// {"scene_id": N, "samples": [[[x, y], ...], ...]}
std::string serialize_prediction(const ScenePrediction & prediction);
ScenePrediction parse_prediction(std::string_view line);
std::vector<ScenePrediction> read_predictions(const std::filesystem::path & path);
std::string serialize_predictions(std::span<const ScenePrediction> predictions);

/// Writes through a sibling temporary file and renames it into place.
void write_text_file(const std::filesystem::path & path, const std::string & contents);
std::string read_text_file(const std::filesystem::path & path);

}  // namespace trajcvae

#endif  // TRAJCVAE__SCENE_IO_HPP_
