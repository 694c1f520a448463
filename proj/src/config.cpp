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

#include "trilat/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "trilat/error.hpp"

namespace trilat {
namespace {

using nlohmann::json;

/// A config object that remembers which keys were read, so leftovers can be reported.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw Error(Errc::Config, "'" + label() + "' must be an object");
  }
  ~Section() = default;

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw Error(Errc::Config, "key '" + child(key) + "' has the wrong type");
    }
  }

  void mark(const char* key) { seen_.insert(key); }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  std::optional<Section> section(const char* key) {
    seen_.insert(key);
    if (!has(key)) return std::nullopt;
    return Section(j_.at(key), child(key));
  }

  const json& raw(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string child(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw Error(Errc::Config, "unknown key '" + child(key.c_str()) + "'");
    }
  }

 private:
  std::string label() const { return path_.empty() ? "<root>" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

ZSide parse_side(const std::string& s, const std::string& key) {
  if (s == "above") return ZSide::Above;
  if (s == "below") return ZSide::Below;
  throw Error(Errc::Config, "key '" + key + "' must be \"above\" or \"below\"");
}

int parse_direction(const std::string& s, const std::string& key) {
  if (s == "+Y" || s == "+y") return +1;
  if (s == "-Y" || s == "-y") return -1;
  throw Error(Errc::Config, "key '" + key + "' must be \"+Y\" or \"-Y\"");
}

Micros ms_to_us(double ms) { return std::llround(ms * 1000.0); }

}  // namespace

std::string_view to_string(ZSide side) noexcept { return side == ZSide::Above ? "above" : "below"; }

NoiseModel RunConfig::default_noise() {
  NoiseModel n;
  n.sigma_depth_mm = 10.0;
  n.sigma_angle_rad = 0.002;
  n.clock_offset_us = {8'000, -3'000, 12'000};
  n.clock_drift_ppm = {20.0, -35.0, 50.0};
  return n;
}

Scene RunConfig::scene() const {
  return Scene{layout_vertices(rig.l12_mm, rig.l13_mm, rig.l23_mm), gait, placement, rig.side};
}

void RunConfig::validate() const {
  try {
    (void)layout_vertices(rig.l12_mm, rig.l13_mm, rig.l23_mm);
  } catch (const Error& e) {
    throw Error(Errc::Config, std::string("rig: ") + e.what());
  }
  gait.validate();
  session.schedule.validate();
  (void)session.iterations();
  if (noise.sigma_depth_mm < 0 || noise.sigma_angle_rad < 0) {
    throw Error(Errc::Config, "noise sigmas must be non-negative");
  }
  if (noise.net.base_ms < 0 || noise.net.jitter_ms < 0 || noise.net.shape < 0) {
    throw Error(Errc::Config, "noise.net_delay values must be non-negative");
  }
  if (session.sync.enabled && session.sync.burst == 0) {
    throw Error(Errc::Config, "sync.burst must be at least 1");
  }
  // Every joint must stay strictly on the configured side of the sensor plane.
  const double lowest = gait.ankle_height_mm;
  const double highest = gait.hip_height_mm + gait.swing_amplitude_mm;
  const double h = placement.sensor_height_mm;
  if (rig.side == ZSide::Above && !(lowest > h)) {
    throw Error(Errc::Config, "rig.z_side is above but joints reach the sensor plane "
                              "(placement.sensor_height_mm too high)");
  }
  if (rig.side == ZSide::Below && !(highest < h)) {
    throw Error(Errc::Config, "rig.z_side is below but joints reach the sensor plane "
                              "(placement.sensor_height_mm too low)");
  }
}

RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  Section root(doc, "");

  if (auto s = root.section("rig")) {
    s->read("l12_mm", cfg.rig.l12_mm);
    s->read("l13_mm", cfg.rig.l13_mm);
    s->read("l23_mm", cfg.rig.l23_mm);
    std::string side = std::string(to_string(cfg.rig.side));
    s->read("z_side", side);
    cfg.rig.side = parse_side(side, s->child("z_side"));
    s->finish();
  }
  if (auto s = root.section("placement")) {
    s->read("origin_x_mm", cfg.placement.origin_x_mm);
    s->read("origin_y_mm", cfg.placement.origin_y_mm);
    s->read("sensor_height_mm", cfg.placement.sensor_height_mm);
    s->finish();
  }
  if (auto s = root.section("gait")) {
    GaitProfile& g = cfg.gait;
    if (s->has("plan")) {
      const json& plan = s->raw("plan");
      if (!plan.is_array()) throw Error(Errc::Config, "key 'gait.plan' must be an array");
      g.plan.clear();
      for (std::size_t i = 0; i < plan.size(); ++i) {
        Section seg(plan[i], "gait.plan[" + std::to_string(i) + "]");
        std::string dir = "+Y";
        int steps = 0;
        seg.read("direction", dir);
        seg.read("steps", steps);
        seg.finish();
        g.plan.push_back({parse_direction(dir, seg.child("direction")), steps});
      }
    } else {
      s->mark("plan");
    }
    s->read("step_length_mm", g.step_length_mm);
    s->read("cadence_steps_per_s", g.cadence_steps_per_s);
    s->read("hip_height_mm", g.hip_height_mm);
    s->read("knee_height_mm", g.knee_height_mm);
    s->read("ankle_height_mm", g.ankle_height_mm);
    s->read("swing_amplitude_mm", g.swing_amplitude_mm);
    if (auto lat = s->section("lateral_offset_mm")) {
      for (Joint j : kJoints) {
        lat->read(std::string(joint_name(j)).c_str(),
                  g.lateral_offset_mm[static_cast<std::size_t>(j)]);
      }
      lat->finish();
    }
    s->finish();
  }
  if (auto s = root.section("noise")) {
    NoiseModel& n = cfg.noise;
    s->read("sigma_depth_mm", n.sigma_depth_mm);
    if (s->has("sigma_angle_rad") && s->has("sigma_angle_deg")) {
      throw Error(Errc::Config, "give only one of 'noise.sigma_angle_rad' and 'noise.sigma_angle_deg'");
    }
    s->read("sigma_angle_rad", n.sigma_angle_rad);
    if (s->has("sigma_angle_deg")) {
      double deg = 0.0;
      s->read("sigma_angle_deg", deg);
      n.sigma_angle_rad = deg * std::numbers::pi / 180.0;
    } else {
      s->mark("sigma_angle_deg");
    }
    s->read("clock_offset_us", n.clock_offset_us);
    s->read("clock_drift_ppm", n.clock_drift_ppm);
    if (auto d = s->section("net_delay")) {
      d->read("base_ms", n.net.base_ms);
      d->read("jitter_ms", n.net.jitter_ms);
      d->read("shape", n.net.shape);
      d->finish();
    }
    s->finish();
  }
  if (auto s = root.section("schedule")) {
    ScheduleConfig& sc = cfg.session.schedule;
    double slot_ms = static_cast<double>(sc.slot_us) / 1000.0;
    s->read("slot_ms", slot_ms);
    sc.slot_us = ms_to_us(slot_ms);
    std::vector<int> clients(sc.clients.begin(), sc.clients.end());
    s->read("clients", clients);
    sc.clients.clear();
    for (int c : clients) {
      if (c < 1 || c > 255) throw Error(Errc::Config, "key 'schedule.clients' holds an invalid id");
      sc.clients.push_back(static_cast<ClientId>(c));
    }
    s->read("trilateration_slot", sc.trilateration_slot);
    if (s->has("nominal_interframe_ms")) {
      double v = 0.0;
      s->read("nominal_interframe_ms", v);
      sc.nominal_interframe_us = ms_to_us(v);
    } else {
      s->mark("nominal_interframe_ms");
    }
    s->finish();
  }
  if (auto s = root.section("sync")) {
    s->read("enabled", cfg.session.sync.enabled);
    s->read("burst", cfg.session.sync.burst);
    double interval_s = static_cast<double>(cfg.session.sync.interval_us) * 1e-6;
    s->read("interval_s", interval_s);
    cfg.session.sync.interval_us = std::llround(interval_s * 1e6);
    s->finish();
  }
  if (auto s = root.section("session")) {
    s->read("duration_s", cfg.session.duration_s);
    s->read("seed", cfg.noise.seed);
    s->read("virtual_time", cfg.session.virtual_time);
    double acq_ms = static_cast<double>(cfg.session.acquisition_us) / 1000.0;
    s->read("acquisition_ms", acq_ms);
    cfg.session.acquisition_us = ms_to_us(acq_ms);
    s->finish();
  }
  if (auto s = root.section("network")) {
    s->read("host", cfg.network.host);
    s->read("port", cfg.network.port);
    s->finish();
  }
  root.finish();
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Config, "cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw Error(Errc::Config, path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

json to_json(const RunConfig& cfg) {
  json plan = json::array();
  for (const GaitSegment& s : cfg.gait.plan) {
    plan.push_back({{"direction", s.direction > 0 ? "+Y" : "-Y"}, {"steps", s.steps}});
  }
  json lateral = json::object();
  for (Joint j : kJoints) {
    lateral[std::string(joint_name(j))] = cfg.gait.lateral_offset_mm[static_cast<std::size_t>(j)];
  }
  const ScheduleConfig& sc = cfg.session.schedule;
  json nominal = nullptr;
  if (sc.nominal_interframe_us) nominal = static_cast<double>(*sc.nominal_interframe_us) / 1000.0;
  return {
      {"rig",
       {{"l12_mm", cfg.rig.l12_mm},
        {"l13_mm", cfg.rig.l13_mm},
        {"l23_mm", cfg.rig.l23_mm},
        {"z_side", to_string(cfg.rig.side)}}},
      {"placement",
       {{"origin_x_mm", cfg.placement.origin_x_mm},
        {"origin_y_mm", cfg.placement.origin_y_mm},
        {"sensor_height_mm", cfg.placement.sensor_height_mm}}},
      {"gait",
       {{"plan", plan},
        {"step_length_mm", cfg.gait.step_length_mm},
        {"cadence_steps_per_s", cfg.gait.cadence_steps_per_s},
        {"hip_height_mm", cfg.gait.hip_height_mm},
        {"knee_height_mm", cfg.gait.knee_height_mm},
        {"ankle_height_mm", cfg.gait.ankle_height_mm},
        {"swing_amplitude_mm", cfg.gait.swing_amplitude_mm},
        {"lateral_offset_mm", lateral}}},
      {"noise",
       {{"sigma_depth_mm", cfg.noise.sigma_depth_mm},
        {"sigma_angle_rad", cfg.noise.sigma_angle_rad},
        {"clock_offset_us", cfg.noise.clock_offset_us},
        {"clock_drift_ppm", cfg.noise.clock_drift_ppm},
        {"net_delay",
         {{"base_ms", cfg.noise.net.base_ms},
          {"jitter_ms", cfg.noise.net.jitter_ms},
          {"shape", cfg.noise.net.shape}}}}},
      {"schedule",
       {{"slot_ms", static_cast<double>(sc.slot_us) / 1000.0},
        {"clients", sc.clients},
        {"trilateration_slot", sc.trilateration_slot},
        {"nominal_interframe_ms", nominal}}},
      {"sync",
       {{"enabled", cfg.session.sync.enabled},
        {"burst", cfg.session.sync.burst},
        {"interval_s", static_cast<double>(cfg.session.sync.interval_us) * 1e-6}}},
      {"session",
       {{"duration_s", cfg.session.duration_s},
        {"seed", cfg.noise.seed},
        {"virtual_time", cfg.session.virtual_time},
        {"acquisition_ms", static_cast<double>(cfg.session.acquisition_us) / 1000.0}}},
      {"network", {{"host", cfg.network.host}, {"port", cfg.network.port}}},
  };
}

std::string config_hash(const RunConfig& cfg) {
  const std::string dump = to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace trilat
