// Copyright 2026 The trilat Authors
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "trilat/config.hpp"

namespace trilat {

/// Command-line overrides applied on top of the config file.
struct CliOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = "out";
  std::optional<double> duration_s;
  std::optional<int> nominal_interframe_ms;
  bool no_sync = false;
  std::optional<bool> virtual_time;
  std::optional<std::string> host;
  std::optional<std::uint16_t> port;
  std::optional<int> client_id;
};

/// Loads the config (or defaults) and applies the overrides. Throws Errc::Config.
RunConfig resolve_config(const CliOptions& opts);

int cmd_simulate(const CliOptions& opts, std::ostream& out);
int cmd_analyze(const std::filesystem::path& dir, std::ostream& out);
int cmd_serve(const CliOptions& opts, std::ostream& out);
int cmd_client(const CliOptions& opts, std::ostream& out);

/// Full entry point: parses arguments, runs the subcommand, prints errors as
/// JSON on `err`. Returns 0 on success, 2 on config errors, 3 otherwise.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace trilat
