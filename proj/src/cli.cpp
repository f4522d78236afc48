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

#include "trajcvae/cli.hpp"

#include "trajcvae/checkpoint.hpp"
#include "trajcvae/grid_io.hpp"
#include "trajcvae/metrics.hpp"
#include "trajcvae/perception.hpp"
#include "trajcvae/run_config.hpp"
#include "trajcvae/scene_io.hpp"
#include "trajcvae/svg_plot.hpp"
#include "trajcvae/train.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

namespace trajcvae
{

namespace fs = std::filesystem;

namespace
{

/// Bad command-line usage detected after parsing.
class UsageError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

std::shared_ptr<spdlog::logger> logger()
{
  static auto log = [] {
    auto l = spdlog::stderr_color_mt("trajcvae");
    l->set_pattern("[%l] %v");
    l->set_level(spdlog::level::info);
    if (const char * env = std::getenv(kLogLevelEnv)) {
      l->set_level(spdlog::level::from_str(env));
    }
    return l;
  }();
  return log;
}

std::string format_loss(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

fs::path resolve(const fs::path & base, const std::string & raw)
{
  const fs::path p(raw);
  return p.is_absolute() || base.empty() ? p : base / p;
}

void require_parent(const fs::path & path)
{
  const auto parent = path.parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw UsageError("output directory '" + parent.string() + "' does not exist");
  }
}

std::vector<Scene> load_scenes(const fs::path & path)
{
  if (!fs::exists(path)) {
    throw UsageError("scene file '" + path.string() + "' does not exist");
  }
  auto scenes = read_scenes(path);
  if (scenes.empty()) {
    throw UsageError("scene file '" + path.string() + "' holds no scenes");
  }
  return scenes;
}

void check_scenes(const std::vector<Scene> & scenes, const ModelConfig & model)
{
  for (const auto & s : scenes) {
    prepare_scene(s, model);
  }
}

std::string metrics_text(const Metrics & m)
{
  std::string out;
  out += "scenes = " + std::to_string(m.scenes) + "\n";
  out += "fork_scenes = " + std::to_string(m.fork_scenes) + "\n";
  out += "min_ade = " + format_real(m.min_ade) + "\n";
  out += "min_fde = " + format_real(m.min_fde) + "\n";
  out += "mode_coverage = " + (m.mode_coverage ? format_real(*m.mode_coverage) : "none") + "\n";
  return out;
}

std::string metrics_json(const Metrics & m)
{
  nlohmann::ordered_json j;
  j["scenes"] = m.scenes;
  j["fork_scenes"] = m.fork_scenes;
  j["min_ade"] = m.min_ade;
  j["min_fde"] = m.min_fde;
  j["mode_coverage"] = m.mode_coverage ? nlohmann::ordered_json(*m.mode_coverage) : nullptr;
  return j.dump(2) + "\n";
}

// ---- gen ------------------------------------------------------------------

struct GenArgs
{
  std::string scenario;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t tau = 8;
  std::size_t delta = 12;
  double dt = 0.4;
  std::string render_dir;
  double meters_per_pixel = 0.25;
};

void cmd_gen(const GenArgs & a, std::ostream & out)
{
  SyntheticSpec spec;
  spec.scenario = parse_scenario(a.scenario);
  spec.tau = a.tau;
  spec.delta = a.delta;
  spec.dt = a.dt;
  if (a.count == 0) {
    throw UsageError("count must be positive");
  }
  const fs::path out_path(a.out);
  require_parent(out_path);
  auto scenes = generate_synthetic_scenes(spec, a.count, a.seed);

  // Renders are computed first so nothing is written if any of them fails.
  std::vector<SceneRendering> renders;
  const fs::path render_dir(a.render_dir);
  if (!a.render_dir.empty()) {
    if (!(a.meters_per_pixel > 0.0)) {
      throw UsageError("meters-per-pixel must be positive");
    }
    for (auto & s : scenes) {
      renders.push_back(render_scene(s, a.meters_per_pixel));
      const fs::path dir = render_dir / ("scene_" + std::to_string(s.scene_id));
      const auto base = out_path.parent_path().empty() ? fs::path(".") : out_path.parent_path();
      for (std::size_t t = 0; t < renders.back().frames.size(); ++t) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%03zu.pgm", t);
        s.frames.push_back(fs::proximate(dir / name, base).generic_string());
      }
      s.seg_map = fs::proximate(dir / "seg.pgm", base).generic_string();
    }
    for (std::size_t i = 0; i < scenes.size(); ++i) {
      const fs::path dir = render_dir / ("scene_" + std::to_string(scenes[i].scene_id));
      fs::create_directories(dir);
      for (std::size_t t = 0; t < renders[i].frames.size(); ++t) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%03zu.pgm", t);
        write_frame_pgm(dir / name, renders[i].frames[t]);
      }
      write_segmentation_pgm(dir / "seg.pgm", renders[i].seg);
    }
  }
  write_text_file(out_path, serialize_scenes(scenes));
  out << "wrote " << scenes.size() << " scenes to " << out_path.string() << "\n";
}

// ---- preprocess -----------------------------------------------------------

struct PreprocessArgs
{
  std::string scenes;
  std::string out;
  std::string flow_dir;
  double alpha = 0.1;
  int iterations = 200;
  double radius_m = 2.0;
};

void cmd_preprocess(const PreprocessArgs & a, std::ostream & out)
{
  if (!(a.alpha > 0.0) || a.iterations <= 0 || !(a.radius_m > 0.0)) {
    throw UsageError("alpha, iterations and radius must be positive");
  }
  const fs::path in_path(a.scenes);
  auto scenes = load_scenes(in_path);
  const fs::path out_path(a.out);
  require_parent(out_path);
  const auto base = in_path.parent_path();
  for (const auto & s : scenes) {
    if (s.frames.empty() || !s.seg_map) {
      throw UsageError("scene " + std::to_string(s.scene_id) + " has no frames or seg_map to preprocess");
    }
    if (s.frames.size() != s.tau) {
      throw UsageError(
        "scene " + std::to_string(s.scene_id) + " has " + std::to_string(s.frames.size()) +
        " frames, expected tau=" + std::to_string(s.tau));
    }
  }

  std::vector<std::vector<FlowField>> all_flows;
  for (auto & s : scenes) {
    std::vector<ImageFrame> frames;
    for (const auto & f : s.frames) {
      frames.push_back(read_frame_pgm(resolve(base, f)));
    }
    const auto seg = read_segmentation_pgm(resolve(base, *s.seg_map));
    auto flows = compute_flow_sequence(frames, a.alpha, a.iterations);
    const auto last = split_target(s).first.last();
    const auto env = pool_env_features(flows, seg, last, a.radius_m);
    s.env = std::vector<double>(env.values.begin(), env.values.end());
    // Keep references valid relative to the output file.
    const auto out_base = out_path.parent_path().empty() ? fs::path(".") : out_path.parent_path();
    for (auto & f : s.frames) {
      f = fs::proximate(resolve(base, f), out_base).generic_string();
    }
    s.seg_map = fs::proximate(resolve(base, *s.seg_map), out_base).generic_string();
    logger()->debug("scene {}: pooled {} flow fields", s.scene_id, flows.size());
    if (!a.flow_dir.empty()) {
      all_flows.push_back(std::move(flows));
    }
  }
  if (!a.flow_dir.empty()) {
    const fs::path dir(a.flow_dir);
    for (std::size_t i = 0; i < scenes.size(); ++i) {
      const fs::path scene_dir = dir / ("scene_" + std::to_string(scenes[i].scene_id));
      fs::create_directories(scene_dir);
      for (std::size_t t = 0; t < all_flows[i].size(); ++t) {
        char name[32];
        std::snprintf(name, sizeof(name), "flow_%03zu.flo", t);
        write_flow_file(scene_dir / name, all_flows[i][t]);
      }
    }
  }
  write_text_file(out_path, serialize_scenes(scenes));
  out << "preprocessed " << scenes.size() << " scenes to " << out_path.string() << "\n";
}

// ---- train ----------------------------------------------------------------

struct TrainArgs
{
  std::string config;
  std::string scenes;
  std::string checkpoint;
  std::string loss_csv;
};

void cmd_train(const TrainArgs & a, std::ostream & out)
{
  const fs::path config_path(a.config);
  if (!fs::exists(config_path)) {
    throw UsageError("config file '" + config_path.string() + "' does not exist");
  }
  RunConfig config = load_run_config(config_path);
  const auto base = config_path.parent_path();
  auto pick = [&](const std::string & flag, const std::string & key, const char * name) {
    if (!flag.empty()) {
      return fs::path(flag);
    }
    if (key.empty()) {
      throw UsageError(std::string("no ") + name + " path given (flag or config key '" + name + "')");
    }
    return resolve(base, key);
  };
  const auto scenes_path = pick(a.scenes, config.scenes, "scenes");
  const auto checkpoint_path = pick(a.checkpoint, config.checkpoint, "checkpoint");
  const auto csv_path = pick(a.loss_csv, config.loss_csv, "loss_csv");
  require_parent(checkpoint_path);
  require_parent(csv_path);

  const auto scenes = load_scenes(scenes_path);
  check_scenes(scenes, config.model);

  logger()->info("training on {} scenes for {} epochs", scenes.size(), config.train.epochs);
  const std::size_t every = std::max<std::size_t>(1, config.train.epochs / 10);
  const auto result = train(scenes, config.model, config.train, std::nullopt,
      [&](std::size_t epoch, double loss, const ParameterSet &) {
        if ((epoch + 1) % every == 0) {
          logger()->info("epoch {} loss {:.6g}", epoch + 1, loss);
        }
      });

  std::string csv = "epoch,loss\n";
  for (std::size_t e = 0; e < result.loss_history.size(); ++e) {
    csv += std::to_string(e + 1) + "," + format_loss(result.loss_history[e]) + "\n";
  }
  Checkpoint cp{config.model, to_text(config), result.params};
  save_checkpoint(checkpoint_path, cp);
  write_text_file(csv_path, csv);
  out << "trained " << result.loss_history.size() << " epochs, final loss "
      << format_loss(result.loss_history.back()) << "\n";
}

// ---- predict / eval -------------------------------------------------------

struct SampleArgs
{
  std::string checkpoint;
  std::string scenes;
  std::size_t k = 20;
  std::uint64_t seed = 0;
  bool zero_latent = false;
  std::string out;
};

std::vector<ScenePrediction> sample(
  const SampleArgs & a, const std::vector<Scene> & scenes, const Checkpoint & cp)
{
  if (a.k == 0) {
    throw UsageError("k must be positive");
  }
  check_scenes(scenes, cp.model);
  EvalOptions options;
  options.k_samples = a.k;
  options.seed = a.seed;
  options.zero_latent = a.zero_latent;
  return predict_scenes(scenes, cp.model, cp.params, options);
}

void cmd_predict(const SampleArgs & a, std::ostream & out)
{
  const fs::path out_path(a.out);
  require_parent(out_path);
  const auto cp = load_checkpoint(a.checkpoint);
  const auto scenes = load_scenes(a.scenes);
  const auto predictions = sample(a, scenes, cp);
  write_text_file(out_path, serialize_predictions(predictions));
  out << "wrote predictions for " << predictions.size() << " scenes to " << out_path.string() << "\n";
}

struct EvalArgs
{
  SampleArgs sample;
  std::string predictions;
  std::string out_json;
  std::string out_text;
  double threshold = 0.5;
};

void cmd_eval(const EvalArgs & a, std::ostream & out)
{
  if (a.predictions.empty() == a.sample.checkpoint.empty()) {
    throw UsageError("give exactly one of --checkpoint or --predictions");
  }
  if (!(a.threshold > 0.0)) {
    throw UsageError("threshold must be positive");
  }
  for (const auto & p : {a.out_json, a.out_text}) {
    if (!p.empty()) {
      require_parent(p);
    }
  }
  const auto scenes = load_scenes(a.sample.scenes);
  std::vector<ScenePrediction> predictions;
  if (!a.predictions.empty()) {
    predictions = read_predictions(a.predictions);
  } else {
    predictions = sample(a.sample, scenes, load_checkpoint(a.sample.checkpoint));
  }
  const auto m = evaluate_predictions(scenes, predictions, a.threshold);
  const auto text = metrics_text(m);
  if (!a.out_json.empty()) {
    write_text_file(a.out_json, metrics_json(m));
  }
  if (!a.out_text.empty()) {
    write_text_file(a.out_text, text);
  }
  out << text;
}

// ---- plot -----------------------------------------------------------------

struct PlotArgs
{
  std::string scenes;
  std::int64_t scene_id = 0;
  std::string predictions;
  std::string out;
};

void cmd_plot(const PlotArgs & a, std::ostream & out)
{
  const fs::path out_path(a.out);
  require_parent(out_path);
  const auto scenes = load_scenes(a.scenes);
  const auto it = std::find_if(scenes.begin(), scenes.end(),
      [&](const Scene & s) { return s.scene_id == a.scene_id; });
  if (it == scenes.end()) {
    throw UsageError("scene " + std::to_string(a.scene_id) + " not found in " + a.scenes);
  }
  std::vector<Trajectory> samples;
  if (!a.predictions.empty()) {
    const auto predictions = read_predictions(a.predictions);
    const auto p = std::find_if(predictions.begin(), predictions.end(),
        [&](const ScenePrediction & q) { return q.scene_id == a.scene_id; });
    if (p == predictions.end()) {
      throw UsageError(
        "no predictions for scene " + std::to_string(a.scene_id) + " in " + a.predictions);
    }
    samples = p->samples;
    for (const auto & s : samples) {
      if (s.size() != it->delta) {
        throw UsageError("prediction length does not match scene delta");
      }
    }
  }
  write_text_file(out_path, render_svg(*it, samples));
  out << "wrote " << out_path.string() << "\n";
}

int guarded(const std::function<void()> & body, std::ostream & err)
{
  try {
    body();
    return kExitOk;
  } catch (const ad::NonFiniteError & e) {
    err << "error: " << e.what() << "\n";
    return kExitComputation;
  } catch (const std::invalid_argument & e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const FormatError & e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const CheckpointError & e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const fs::filesystem_error & e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception & e) {
    err << "error: " << e.what() << "\n";
    return kExitComputation;
  }
}

}  // namespace

int run_cli(const std::vector<std::string> & args, std::ostream & out, std::ostream & err)
{
  CLI::App app{"Social-interaction CVAE trajectory prediction"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  GenArgs gen;
  auto * g = app.add_subcommand("gen", "Generate synthetic scenes as JSON lines");
  g->add_option("scenario", gen.scenario, "constant_velocity, avoidance or fork")->required();
  g->add_option("count", gen.count, "Number of scenes")->required();
  g->add_option("--seed", gen.seed, "Generator seed");
  g->add_option("-o,--out", gen.out, "Output scene file")->required();
  g->add_option("--tau", gen.tau, "Observed steps");
  g->add_option("--delta", gen.delta, "Predicted steps");
  g->add_option("--dt", gen.dt, "Sample period [s]");
  g->add_option("--render-dir", gen.render_dir, "Also render frames and segmentation maps here");
  g->add_option("--meters-per-pixel", gen.meters_per_pixel, "Render resolution");

  PreprocessArgs pre;
  auto * p = app.add_subcommand("preprocess", "Compute flow and environment features from frames");
  p->add_option("scenes", pre.scenes, "Input scene file")->required();
  p->add_option("-o,--out", pre.out, "Output scene file with env features")->required();
  p->add_option("--alpha", pre.alpha, "Horn-Schunck smoothness weight");
  p->add_option("--iterations", pre.iterations, "Horn-Schunck iterations");
  p->add_option("--radius", pre.radius_m, "Pooling radius [m]");
  p->add_option("--flow-dir", pre.flow_dir, "Also write flow fields here");

  TrainArgs tr;
  auto * t = app.add_subcommand("train", "Train on a scene file");
  t->add_option("config", tr.config, "Run config file (key = value)")->required();
  t->add_option("--scenes", tr.scenes, "Override the config's scene file");
  t->add_option("--checkpoint", tr.checkpoint, "Override the config's checkpoint path");
  t->add_option("--loss-csv", tr.loss_csv, "Override the config's loss CSV path");

  SampleArgs pr;
  auto * pd = app.add_subcommand("predict", "Sample K futures per scene");
  pd->add_option("checkpoint", pr.checkpoint, "Checkpoint file")->required();
  pd->add_option("scenes", pr.scenes, "Scene file")->required();
  pd->add_option("-k,--k", pr.k, "Samples per scene");
  pd->add_option("--seed", pr.seed, "Sampling seed");
  pd->add_flag("--zero-latent", pr.zero_latent, "Decode one sample at z = 0");
  pd->add_option("-o,--out", pr.out, "Output predictions file")->required();

  EvalArgs ev;
  auto * e = app.add_subcommand("eval", "Best-of-K metrics");
  e->add_option("scenes", ev.sample.scenes, "Scene file")->required();
  e->add_option("--checkpoint", ev.sample.checkpoint, "Sample from this checkpoint");
  e->add_option("--predictions", ev.predictions, "Score an existing predictions file");
  e->add_option("-k,--k", ev.sample.k, "Samples per scene");
  e->add_option("--seed", ev.sample.seed, "Sampling seed");
  e->add_flag("--zero-latent", ev.sample.zero_latent, "Decode one sample at z = 0");
  e->add_option("--threshold", ev.threshold, "Coverage FDE threshold [m]");
  e->add_option("--out-json", ev.out_json, "Metrics JSON file");
  e->add_option("--out-text", ev.out_text, "Metrics key = value file");

  PlotArgs pl;
  auto * pt = app.add_subcommand("plot", "Render one scene and its samples as SVG");
  pt->add_option("scenes", pl.scenes, "Scene file")->required();
  pt->add_option("--scene-id", pl.scene_id, "Scene to plot")->required();
  pt->add_option("--predictions", pl.predictions, "Predictions file");
  pt->add_option("-o,--out", pl.out, "Output SVG")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError & ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  if (g->parsed()) {
    return guarded([&] { cmd_gen(gen, out); }, err);
  }
  if (p->parsed()) {
    return guarded([&] { cmd_preprocess(pre, out); }, err);
  }
  if (t->parsed()) {
    return guarded([&] { cmd_train(tr, out); }, err);
  }
  if (pd->parsed()) {
    return guarded([&] { cmd_predict(pr, out); }, err);
  }
  if (e->parsed()) {
    return guarded([&] { cmd_eval(ev, out); }, err);
  }
  return guarded([&] { cmd_plot(pl, out); }, err);
}

int run_cli(int argc, const char * const * argv)
{
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) {
    args.emplace_back(argv[i]);
  }
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace trajcvae
