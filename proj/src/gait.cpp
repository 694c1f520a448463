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
#include <numbers>
#include <numeric>

#include "trilat/error.hpp"
#include "trilat/simulator.hpp"

namespace trilat {
namespace {

bool is_left(Joint j) {
  return j == Joint::LeftHip || j == Joint::LeftKnee || j == Joint::LeftAnkle;
}

double height_of(const GaitProfile& p, Joint j) {
  switch (j) {
    case Joint::LeftHip:
    case Joint::RightHip: return p.hip_height_mm;
    case Joint::LeftKnee:
    case Joint::RightKnee: return p.knee_height_mm;
    case Joint::LeftAnkle:
    case Joint::RightAnkle: return p.ankle_height_mm;
  }
  return 0.0;
}

// Fraction of the swing amplitude each joint is lifted by.
double swing_share(Joint j) {
  switch (j) {
    case Joint::LeftKnee:
    case Joint::RightKnee: return 0.5;
    case Joint::LeftAnkle:
    case Joint::RightAnkle: return 1.0;
    default: return 0.0;
  }
}

}  // namespace

int GaitProfile::total_steps() const noexcept {
  return std::accumulate(plan.begin(), plan.end(), 0,
                         [](int acc, const GaitSegment& s) { return acc + s.steps; });
}

void GaitProfile::validate() const {
  if (!(step_length_mm > 0)) throw Error(Errc::Config, "gait.step_length_mm must be positive");
  if (!(cadence_steps_per_s > 0)) {
    throw Error(Errc::Config, "gait.cadence_steps_per_s must be positive");
  }
  if (!(hip_height_mm > knee_height_mm && knee_height_mm > ankle_height_mm &&
        ankle_height_mm > 0)) {
    throw Error(Errc::Config, "gait heights must satisfy hip > knee > ankle > 0");
  }
  if (swing_amplitude_mm < 0) throw Error(Errc::Config, "gait.swing_amplitude_mm is negative");
  for (const GaitSegment& s : plan) {
    if ((s.direction != 1 && s.direction != -1) || s.steps < 0) {
      throw Error(Errc::Config, "gait.plan entries need direction +Y/-Y and steps >= 0");
    }
  }
}

Point3d gait_position(const GaitProfile& profile, Joint joint, double t_s) {
  const double step_s = 1.0 / profile.cadence_steps_per_s;
  const double steps_done = std::max(0.0, t_s) / step_s;

  double y = 0.0;
  double lift = 0.0;
  int index = 0;
  for (const GaitSegment& seg : profile.plan) {
    for (int k = 0; k < seg.steps; ++k, ++index) {
      const double phase = steps_done - index;
      if (phase >= 1.0) {
        y += seg.direction * profile.step_length_mm;
        continue;
      }
      if (phase > 0.0) {
        const double ease = 0.5 * (1.0 - std::cos(std::numbers::pi * phase));
        y += seg.direction * profile.step_length_mm * ease;
        const bool left_swings = index % 2 == 0;
        if (left_swings == is_left(joint)) lift = std::sin(std::numbers::pi * phase);
      }
      return {profile.lateral_offset_mm[static_cast<std::size_t>(joint)], y,
              height_of(profile, joint) + swing_share(joint) * profile.swing_amplitude_mm * lift};
    }
  }
  return {profile.lateral_offset_mm[static_cast<std::size_t>(joint)], y, height_of(profile, joint)};
}

Point3d world_position(const Scene& scene, Joint joint, double t_s) {
  const Point3d walker = gait_position(scene.gait, joint, t_s);
  return {scene.placement.origin_x_mm + walker.x(), scene.placement.origin_y_mm + walker.y(),
          walker.z() - scene.placement.sensor_height_mm};
}

}  // namespace trilat
