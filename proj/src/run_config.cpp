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

#include "trajcvae/run_config.hpp"

#include "trajcvae/scene_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace trajcvae
{

namespace
{

std::string trim(std::string_view s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

// Shortest text that parses back to the same double.
std::string exact_real(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  for (int precision = 1; precision < 17; ++precision) {
    char shorter[32];
    std::snprintf(shorter, sizeof(shorter), "%.*g", precision, v);
    if (std::strtod(shorter, nullptr) == v) {
      return shorter;
    }
  }
  return buf;
}

std::string join_sizes(const std::vector<std::size_t> & sizes)
{
  std::string out;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i > 0) {
      out += ',';
    }
    out += std::to_string(sizes[i]);
  }
  return out;
}

struct Context
{
  std::string origin;
  std::string key;
  std::size_t line = 0;

  [[noreturn]] void fail(const std::string & what) const
  {
    throw ConfigError(
      origin + ":" + std::to_string(line) + ": key '" + key + "': " + what, key, line);
  }

  double real(const std::string & v) const
  {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
      fail("expected a real number, got '" + v + "'");
    }
    return out;
  }

  std::uint64_t unsigned_integer(const std::string & v) const
  {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
      fail("expected a non-negative integer, got '" + v + "'");
    }
    return out;
  }

  std::size_t positive(const std::string & v) const
  {
    const auto out = unsigned_integer(v);
    if (out == 0) {
      fail("must be positive");
    }
    return static_cast<std::size_t>(out);
  }

  double positive_real(const std::string & v) const
  {
    const double out = real(v);
    if (!(out > 0.0)) {
      fail("must be positive");
    }
    return out;
  }

  std::vector<std::size_t> sizes(const std::string & v) const
  {
    std::vector<std::size_t> out;
    if (v.empty() || v == "none") {
      return out;
    }
    std::stringstream in(v);
    std::string part;
    while (std::getline(in, part, ',')) {
      out.push_back(positive(trim(part)));
    }
    return out;
  }
};

using Setter = std::function<void(RunConfig &, const std::string &, const Context &)>;

const std::map<std::string, Setter> & setters()
{
  static const std::map<std::string, Setter> table = {
    {"learning_rate", [](RunConfig & c, const std::string & v, const Context & x) {
       c.train.learning_rate = x.positive_real(v);
     }},
    {"epochs", [](RunConfig & c, const std::string & v, const Context & x) {
       c.train.epochs = x.positive(v);
     }},
    {"beta", [](RunConfig & c, const std::string & v, const Context & x) {
       c.train.beta = x.real(v);
       if (c.train.beta < 0.0) {
         x.fail("must be non-negative");
       }
     }},
    {"k_samples", [](RunConfig & c, const std::string & v, const Context & x) {
       c.train.k_samples = x.positive(v);
     }},
    {"seed", [](RunConfig & c, const std::string & v, const Context & x) {
       c.train.seed = x.unsigned_integer(v);
     }},
    {"adam_beta1", [](RunConfig & c, const std::string & v, const Context & x) {
       c.train.adam_beta1 = x.real(v);
     }},
    {"adam_beta2", [](RunConfig & c, const std::string & v, const Context & x) {
       c.train.adam_beta2 = x.real(v);
     }},
    {"adam_eps", [](RunConfig & c, const std::string & v, const Context & x) {
       c.train.adam_eps = x.positive_real(v);
     }},
    {"update", [](RunConfig & c, const std::string & v, const Context & x) {
       try {
         c.train.update = parse_update_mode(v);
       } catch (const std::invalid_argument & e) {
         x.fail(e.what());
       }
     }},
    {"tau", [](RunConfig & c, const std::string & v, const Context & x) {
       c.model.graph.tau = x.positive(v);
     }},
    {"delta", [](RunConfig & c, const std::string & v, const Context & x) {
       c.model.cvae.delta = x.positive(v);
     }},
    {"d_node", [](RunConfig & c, const std::string & v, const Context & x) {
       c.model.graph.d_node = x.positive(v);
     }},
    {"d_y", [](RunConfig & c, const std::string & v, const Context & x) {
       c.model.graph.d_y = x.positive(v);
       c.model.cvae.d_y = c.model.graph.d_y;
     }},
    {"d_z", [](RunConfig & c, const std::string & v, const Context & x) {
       c.model.cvae.d_z = x.positive(v);
     }},
    {"rounds", [](RunConfig & c, const std::string & v, const Context & x) {
       c.model.graph.rounds = x.positive(v);
     }},
    {"radius_m", [](RunConfig & c, const std::string & v, const Context & x) {
       c.model.graph.radius_m = x.positive_real(v);
     }},
    {"encoder_hidden", [](RunConfig & c, const std::string & v, const Context & x) {
       c.model.cvae.encoder_hidden = x.sizes(v);
     }},
    {"decoder_hidden", [](RunConfig & c, const std::string & v, const Context & x) {
       c.model.cvae.decoder_hidden = x.sizes(v);
     }},
    {"activation", [](RunConfig & c, const std::string & v, const Context & x) {
       try {
         c.model.graph.activation = parse_activation(v);
         c.model.cvae.activation = c.model.graph.activation;
       } catch (const std::invalid_argument & e) {
         x.fail(e.what());
       }
     }},
    {"flow_alpha", [](RunConfig & c, const std::string & v, const Context & x) {
       c.flow_alpha = x.positive_real(v);
     }},
    {"flow_iterations", [](RunConfig & c, const std::string & v, const Context & x) {
       const auto n = x.positive(v);
       if (n > static_cast<std::size_t>(std::numeric_limits<int>::max())) {
         x.fail("too large");
       }
       c.flow_iterations = static_cast<int>(n);
     }},
    {"pool_radius_m", [](RunConfig & c, const std::string & v, const Context & x) {
       c.pool_radius_m = x.positive_real(v);
     }},
    {"scenes", [](RunConfig & c, const std::string & v, const Context &) { c.scenes = v; }},
    {"checkpoint", [](RunConfig & c, const std::string & v, const Context &) { c.checkpoint = v; }},
    {"loss_csv", [](RunConfig & c, const std::string & v, const Context &) { c.loss_csv = v; }},
  };
  return table;
}

}  // namespace

void RunConfig::validate() const
{
  train.validate();
  model.validate();
  if (!(flow_alpha > 0.0) || flow_iterations <= 0 || !(pool_radius_m > 0.0)) {
    throw ConfigError("flow settings must be positive", "flow_alpha", 0);
  }
}

RunConfig parse_run_config(std::string_view text, std::string_view origin)
{
  RunConfig config;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  Context ctx{std::string(origin), "", 0};
  while (std::getline(in, raw)) {
    ++ctx.line;
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      ctx.key = line;
      ctx.fail("expected 'key = value'");
    }
    ctx.key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const auto it = setters().find(ctx.key);
    if (it == setters().end()) {
      ctx.fail("unknown key");
    }
    if (!seen.insert(ctx.key).second) {
      ctx.fail("duplicate key");
    }
    it->second(config, value, ctx);
  }
  try {
    config.validate();
  } catch (const ConfigError &) {
    throw;
  } catch (const std::invalid_argument & e) {
    throw ConfigError(std::string(origin) + ": " + e.what(), "", 0);
  }
  return config;
}

RunConfig load_run_config(const std::filesystem::path & path)
{
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const FormatError & e) {
    throw ConfigError(e.what(), "", 0);
  }
  return parse_run_config(text, path.string());
}

std::string model_config_text(const ModelConfig & model)
{
  std::ostringstream out;
  out << "tau = " << model.graph.tau << "\n";
  out << "delta = " << model.cvae.delta << "\n";
  out << "d_node = " << model.graph.d_node << "\n";
  out << "d_y = " << model.graph.d_y << "\n";
  out << "d_z = " << model.cvae.d_z << "\n";
  out << "rounds = " << model.graph.rounds << "\n";
  out << "radius_m = " << exact_real(model.graph.radius_m) << "\n";
  out << "encoder_hidden = " << join_sizes(model.cvae.encoder_hidden) << "\n";
  out << "decoder_hidden = " << join_sizes(model.cvae.decoder_hidden) << "\n";
  out << "activation = " << to_string(model.graph.activation) << "\n";
  return out.str();
}

ModelConfig parse_model_config(std::string_view text)
{
  return parse_run_config(text, "model config").model;
}

std::string to_text(const RunConfig & c)
{
  std::ostringstream out;
  out << "learning_rate = " << exact_real(c.train.learning_rate) << "\n";
  out << "epochs = " << c.train.epochs << "\n";
  out << "beta = " << exact_real(c.train.beta) << "\n";
  out << "k_samples = " << c.train.k_samples << "\n";
  out << "seed = " << c.train.seed << "\n";
  out << "adam_beta1 = " << exact_real(c.train.adam_beta1) << "\n";
  out << "adam_beta2 = " << exact_real(c.train.adam_beta2) << "\n";
  out << "adam_eps = " << exact_real(c.train.adam_eps) << "\n";
  out << "update = " << to_string(c.train.update) << "\n";
  out << model_config_text(c.model);
  out << "flow_alpha = " << exact_real(c.flow_alpha) << "\n";
  out << "flow_iterations = " << c.flow_iterations << "\n";
  out << "pool_radius_m = " << exact_real(c.pool_radius_m) << "\n";
  if (!c.scenes.empty()) {
    out << "scenes = " << c.scenes << "\n";
  }
  if (!c.checkpoint.empty()) {
    out << "checkpoint = " << c.checkpoint << "\n";
  }
  if (!c.loss_csv.empty()) {
    out << "loss_csv = " << c.loss_csv << "\n";
  }
  return out.str();
}

}  // namespace trajcvae
