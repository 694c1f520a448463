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

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "trilat/endpoints.hpp"
#include "trilat/geometry.hpp"
#include "trilat/schedule.hpp"
#include "trilat/wire.hpp"

namespace trilat {

struct GaitSegment {
  int direction = +1;  // +1 walks toward +Y, -1 toward -Y
  int steps = 0;
  bool operator==(const GaitSegment&) const = default;
};

/// Piecewise-sinusoidal walking pattern in the walker frame: X lateral,
/// Y along the walkway (0 at t = 0), Z height above the floor.
struct GaitProfile {
  std::vector<GaitSegment> plan{{+1, 3}, {-1, 4}, {+1, 4}, {-1, 5}, {+1, 3}};
  double step_length_mm = 400.0;
  double cadence_steps_per_s = 0.5;
  double hip_height_mm = 900.0;
  double knee_height_mm = 500.0;
  double ankle_height_mm = 100.0;
  std::array<double, kJointCount> lateral_offset_mm{-100, 100, -100, 100, -100, 100};
  double swing_amplitude_mm = 150.0;

  int total_steps() const noexcept;
  /// Throws Errc::Config on unordered heights or a non-positive step/cadence.
  void validate() const;
};

/// Deterministic joint position at `t_s` seconds (walker frame). After the
/// plan is exhausted the walker stands still.
Point3d gait_position(const GaitProfile& profile, Joint joint, double t_s);

/// Where the walkway sits in the rig frame. Sensors are mounted at
/// `sensor_height_mm` above the floor; the sensor plane is z = 0.
struct Placement {
  double origin_x_mm = 3000.0;
  double origin_y_mm = 1500.0;
  double sensor_height_mm = 2500.0;
};

struct Scene {
  RigGeometryd rig;
  GaitProfile gait;
  Placement placement;
  ZSide side = ZSide::Below;
};

Point3d world_position(const Scene& scene, Joint joint, double t_s);

struct NetworkDelay {
  double base_ms = 0.3;
  double jitter_ms = 0.08;  // lognormal median; 0 disables jitter
  double shape = 1.0;       // lognormal sigma
};

struct NoiseModel {
  double sigma_depth_mm = 0.0;
  double sigma_angle_rad = 0.0;
  std::array<Micros, 3> clock_offset_us{};
  std::array<double, 3> clock_drift_ppm{};
  NetworkDelay net;
  std::uint64_t seed = 1;

  /// No measurement noise, no clock error, fixed network delay.
  static NoiseModel none();
};

using Rng = std::mt19937_64;

/// Independent, reproducible stream `stream` derived from `seed`.
Rng make_rng(std::uint64_t seed, std::uint64_t stream);

/// What sensor `s` reports for `world`, with Gaussian noise drawn from `rng`.
/// Throws Errc::OutOfView when the target is not in front of the sensor.
RawMeasurementd observe(const RigGeometryd& rig, Sensor s, const Point3d& world,
                        const NoiseModel& noise, Rng& rng);

struct RawFrameRecord {
  std::int64_t iteration = 0;
  Joint joint = Joint::LeftHip;
  RawMeasurementd measurement;
};

/// Sensor feeding one client: latches the scene at each iteration boundary.
class SimulatedSensorSource final : public MeasurementSource {
 public:
  SimulatedSensorSource(const Scene& scene, Sensor sensor, const NoiseModel& noise,
                        Micros iteration_us, std::int64_t iterations);

  std::optional<JointMeasurements> read(std::int64_t iteration) override;
  const std::vector<RawFrameRecord>& records() const noexcept { return records_; }

 private:
  Scene scene_;
  Sensor sensor_;
  NoiseModel noise_;
  Micros iteration_us_;
  std::int64_t iterations_;
  Rng rng_;
  std::vector<RawFrameRecord> records_;
};

struct SyncSettings {
  bool enabled = true;
  std::size_t burst = 8;
  Micros interval_us = 10'000'000;
};

struct SessionSettings {
  ScheduleConfig schedule;
  SyncSettings sync;
  double duration_s = 60.0;
  Micros acquisition_us = 3'000;
  bool virtual_time = true;
  /// Test hook: client index (0-based) -> number of frames after which it drops the connection.
  std::array<std::optional<std::uint32_t>, 3> disconnect_after_frames{};

  std::int64_t iterations() const;
};

/// Client endpoint settings for client `id` of a session.
ClientConfig client_config(const SessionSettings& settings, ClientId id);

struct GroundTruthSample {
  std::int64_t iteration = 0;
  Joint joint = Joint::LeftHip;
  Point3d position = Point3d::Zero();
};

/// Scene position of every joint at each iteration boundary.
std::vector<GroundTruthSample> ground_truth_for(const Scene& scene, Micros iteration_us,
                                                std::int64_t iterations);

struct SessionArtifacts {
  std::vector<GroundTruthSample> ground_truth;
  std::array<std::vector<RawFrameRecord>, 3> raw;
  std::vector<TrilateratedPosition> trilaterated;
  std::vector<Arrival> events;
  SessionSummary summary;
  std::array<ClientSummary, 3> clients;
};

/// Runs the server and three clients in-process. Virtual time is a
/// single-threaded discrete-event run over an in-memory network carrying the
/// encoded wire messages; real time uses TCP on loopback.
SessionArtifacts run_session(const Scene& scene, const NoiseModel& noise,
                             const SessionSettings& settings);

}  // namespace trilat
