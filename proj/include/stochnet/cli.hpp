/*
 * Copyright 2026 The stochnet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "stochnet/config.hpp"

namespace stochnet::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kDataError = 3,
  kEnvironmentError = 4,
};

/// stochnet <train|eval|oracle|segment|serve> --config <path> [--set k=v]...
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cmd_train(const RunConfig& cfg, std::ostream& out);
int cmd_eval(const RunConfig& cfg, std::ostream& out);
int cmd_oracle(const RunConfig& cfg, std::ostream& out);
int cmd_segment(const RunConfig& cfg, std::ostream& out);
/// Blocks until SIGINT or SIGTERM.
int cmd_serve(const RunConfig& cfg, std::ostream& out);

/// Exit code for an exception escaping a command.
int exit_code_for(const std::exception& e);

/// "dir/model.ckpt" + "bn" -> "dir/model.bn.ckpt"
std::filesystem::path tagged_path(const std::filesystem::path& path,
                                  const std::string& tag);

}  // namespace stochnet::cli
