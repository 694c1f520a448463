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

#include <filesystem>
#include <string>

#include "json.hpp"
#include "trilat/endpoints.hpp"
#include "trilat/simulator.hpp"

namespace trilat {

struct RigConfig {
  double l12_mm = 6000.0;
  double l13_mm = 5000.0;
  double l23_mm = 5000.0;
  ZSide side = ZSide::Below;
};

/// Everything a run needs, as read from a config file (all keys optional).
struct RunConfig {
  RigConfig rig;
  Placement placement;
  GaitProfile gait;
  NoiseModel noise = default_noise();
  SessionSettings session;
  Endpoint network{"127.0.0.1", 7345};

  Scene scene() const;
  /// Throws Errc::Config if the combination cannot run (side vs. heights, baselines, schedule).
  void validate() const;

  static NoiseModel default_noise();
};

/// Parses a config document. Unknown keys and type errors throw Errc::Config
/// with the dotted key path in the message.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

/// Stable 64-bit FNV-1a hash of the canonical config dump, as hex.
std::string config_hash(const RunConfig& cfg);

std::string_view to_string(ZSide side) noexcept;

}  // namespace trilat
