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

#include <cmath>
#include <string>

#include "trilat/error.hpp"
#include "trilat/simulator.hpp"

namespace trilat {

NoiseModel NoiseModel::none() {
  NoiseModel n;
  n.net.jitter_ms = 0.0;
  return n;
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

RawMeasurementd observe(const RigGeometryd& rig, Sensor s, const Point3d& world,
                        const NoiseModel& noise, Rng& rng) {
  const Point3d local = to_sensor_local(rig, s, world);
  if (!(local.y() > 0)) {
    throw Error(Errc::OutOfView, "target is behind sensor k" + std::to_string(static_cast<int>(s)));
  }
  RawMeasurementd m = measurement_from_local(local);
  if (noise.sigma_depth_mm > 0) {
    m.depth += std::normal_distribution<double>(0.0, noise.sigma_depth_mm)(rng);
  }
  if (noise.sigma_angle_rad > 0) {
    std::normal_distribution<double> angle(0.0, noise.sigma_angle_rad);
    m.theta1 += angle(rng);
    m.theta2 += angle(rng);
  }
  if (!is_valid(m)) {
    throw Error(Errc::OutOfView, "noisy reading of sensor k" + std::to_string(static_cast<int>(s)) +
                                     " left the measurable range");
  }
  return m;
}

SimulatedSensorSource::SimulatedSensorSource(const Scene& scene, Sensor sensor,
                                             const NoiseModel& noise, Micros iteration_us,
                                             std::int64_t iterations)
    : scene_(scene),
      sensor_(sensor),
      noise_(noise),
      iteration_us_(iteration_us),
      iterations_(iterations),
      rng_(make_rng(noise.seed, 100 + static_cast<std::uint64_t>(sensor))) {}

std::optional<JointMeasurements> SimulatedSensorSource::read(std::int64_t iteration) {
  if (iteration < 0 || iteration >= iterations_) return std::nullopt;
  const double t_s = static_cast<double>(iteration * iteration_us_) * 1e-6;
  JointMeasurements out;
  for (std::size_t j = 0; j < kJointCount; ++j) {
    const Point3d world = world_position(scene_, kJoints[j], t_s);
    out[j] = observe(scene_.rig, sensor_, world, noise_, rng_);
    records_.push_back({iteration, kJoints[j], out[j]});
  }
  return out;
}

}  // namespace trilat
