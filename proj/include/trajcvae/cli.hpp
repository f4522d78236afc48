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

#ifndef TRAJCVAE__CLI_HPP_
#define TRAJCVAE__CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace trajcvae
{

/// Process exit codes.
constexpr int kExitOk = 0;
constexpr int kExitComputation = 1;
constexpr int kExitInput = 2;

/// Environment variable holding the log level (trace, debug, info, warn, error, off).
constexpr const char * kLogLevelEnv = "TRAJCVAE_LOG_LEVEL";

/**
 * @brief Runs one CLI verb: gen, preprocess, train, predict, eval or plot.
 *
 * `args` excludes the program name. Normal output goes to `out`, diagnostics
 * to `err`. Every verb validates all inputs before writing any file.
 */
int run_cli(const std::vector<std::string> & args, std::ostream & out, std::ostream & err);

int run_cli(int argc, const char * const * argv);

}  // namespace trajcvae

#endif  // TRAJCVAE__CLI_HPP_
