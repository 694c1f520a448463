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

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "trilat/error.hpp"

namespace trilat {

/// Position in millimetres in the rig frame (sensor plane is z = 0).
template <typename Scalar>
using Point3 = Eigen::Matrix<Scalar, 3, 1>;
using Point3d = Point3<double>;

/// One sensor's view of a target: perpendicular depth to the sensor's
/// vertical plane plus horizontal and vertical bearing angles.
template <typename Scalar>
struct RawMeasurement {
  Scalar depth{};   // mm
  Scalar theta1{};  // rad, horizontal
  Scalar theta2{};  // rad, vertical

  bool operator==(const RawMeasurement&) const = default;
};
using RawMeasurementd = RawMeasurement<double>;

template <typename Scalar>
bool is_valid(const RawMeasurement<Scalar>& m) {
  using std::abs;
  using std::isfinite;
  constexpr Scalar half_pi = std::numbers::pi_v<Scalar> / 2;
  return isfinite(m.depth) && isfinite(m.theta1) && isfinite(m.theta2) && m.depth > 0 &&
         abs(m.theta1) < half_pi && abs(m.theta2) < half_pi;
}

/// Which half-space relative to the sensor plane the tracked targets occupy.
enum class ZSide { Above, Below };

/// Sensor vertex index. K1 sits at the origin, K2 on +x, K3 closes the triangle with y > 0.
enum class Sensor : int { K1 = 1, K2 = 2, K3 = 3 };

inline constexpr std::array<Sensor, 3> kSensors{Sensor::K1, Sensor::K2, Sensor::K3};

inline constexpr int index_of(Sensor s) noexcept { return static_cast<int>(s) - 1; }

/// Baselines between the three sensors and the vertex coordinates derived from them.
template <typename Scalar>
class RigGeometry {
 public:
  Scalar l12() const noexcept { return l12_; }
  Scalar l13() const noexcept { return l13_; }
  Scalar l23() const noexcept { return l23_; }

  const Point3<Scalar>& vertex(Sensor s) const noexcept { return vertices_[index_of(s)]; }
  const std::array<Point3<Scalar>, 3>& vertices() const noexcept { return vertices_; }

  template <typename S>
  friend RigGeometry<S> layout_vertices(S l12, S l13, S l23);

 private:
  Scalar l12_{}, l13_{}, l23_{};
  std::array<Point3<Scalar>, 3> vertices_{};
};
using RigGeometryd = RigGeometry<double>;

/// Places k1 at the origin, k2 on the +x axis and k3 in the y > 0 half-plane.
///
/// The height of k3 over the k1-k2 baseline comes from Heron's formula
/// (semi-perimeter s = (l12 + l13 + l23) / 2). Its x coordinate uses the law
/// of cosines so that an obtuse angle at k1 yields the correct negative value.
/// Throws Errc::DegenerateTriangle unless all baselines are positive and the
/// triangle inequality holds strictly.
template <typename Scalar>
RigGeometry<Scalar> layout_vertices(Scalar l12, Scalar l13, Scalar l23) {
  using std::isfinite;
  using std::sqrt;
  const bool finite = isfinite(l12) && isfinite(l13) && isfinite(l23);
  if (!finite || l12 <= 0 || l13 <= 0 || l23 <= 0 || !(l12 + l13 > l23) || !(l12 + l23 > l13) ||
      !(l13 + l23 > l12)) {
    throw Error(Errc::DegenerateTriangle, "baselines " + std::to_string(double(l12)) + ", " +
                                              std::to_string(double(l13)) + ", " +
                                              std::to_string(double(l23)) +
                                              " do not form a proper triangle");
  }
  const Scalar s = (l12 + l13 + l23) / 2;
  const Scalar area_sq = s * (s - l12) * (s - l13) * (s - l23);
  if (!(area_sq > 0)) {
    throw Error(Errc::DegenerateTriangle, "sensors are collinear");
  }
  const Scalar y3 = 2 * sqrt(area_sq) / l12;
  const Scalar x3 = (l12 * l12 + l13 * l13 - l23 * l23) / (2 * l12);

  RigGeometry<Scalar> rig;
  rig.l12_ = l12;
  rig.l13_ = l13;
  rig.l23_ = l23;
  rig.vertices_[0] = Point3<Scalar>::Zero();
  rig.vertices_[1] = Point3<Scalar>(l12, 0, 0);
  rig.vertices_[2] = Point3<Scalar>(x3, y3, 0);
  return rig;
}

/// Sensor-to-target distance from a depth + bearing measurement.
template <typename Scalar>
Scalar radius_from_measurement(const RawMeasurement<Scalar>& m) {
  using std::cos;
  using std::hypot;
  using std::tan;
  return hypot(m.depth / cos(m.theta1), m.depth * tan(m.theta2));
}

/// Default tolerance on a negative z^2 before the spheres are declared disjoint: (50 mm)^2.
template <typename Scalar>
inline constexpr Scalar kDefaultZSquaredSlack = Scalar(50) * Scalar(50);

/// Intersects the three spheres centred on the rig vertices.
///
/// Slightly inconsistent radii (z^2 in [-slack, 0)) collapse onto the sensor
/// plane; anything more negative throws Errc::NoIntersection.
template <typename Scalar>
Point3<Scalar> trilaterate(const RigGeometry<Scalar>& rig, Scalar r1, Scalar r2, Scalar r3,
                           ZSide side, Scalar z_squared_slack = kDefaultZSquaredSlack<Scalar>) {
  using std::isfinite;
  using std::sqrt;
  if (!(r1 > 0 && r2 > 0 && r3 > 0) || !isfinite(r1) || !isfinite(r2) || !isfinite(r3)) {
    throw Error(Errc::InvariantViolation, "sphere radii must be positive and finite");
  }
  const Scalar x2 = rig.vertex(Sensor::K2).x();
  const Scalar x3 = rig.vertex(Sensor::K3).x();
  const Scalar y3 = rig.vertex(Sensor::K3).y();

  const Scalar r1_sq = r1 * r1;
  const Scalar x = (r1_sq - r2 * r2 + x2 * x2) / (2 * x2);
  const Scalar y = (r1_sq - r3 * r3 + x3 * x3 + y3 * y3 - 2 * x3 * x) / (2 * y3);
  const Scalar z_sq = r1_sq - x * x - y * y;
  if (z_sq < -z_squared_slack) {
    throw Error(Errc::NoIntersection,
                "spheres do not intersect (z^2 = " + std::to_string(double(z_sq)) + " mm^2)");
  }
  const Scalar z = z_sq > 0 ? sqrt(z_sq) : Scalar(0);
  return {x, y, side == ZSide::Above ? z : -z};
}

template <typename Scalar>
Point3<Scalar> trilaterate(const RigGeometry<Scalar>& rig,
                           const std::array<RawMeasurement<Scalar>, 3>& measurements, ZSide side,
                           Scalar z_squared_slack = kDefaultZSquaredSlack<Scalar>) {
  return trilaterate(rig, radius_from_measurement(measurements[0]),
                     radius_from_measurement(measurements[1]),
                     radius_from_measurement(measurements[2]), side, z_squared_slack);
}

// Sensor-local frames: k1 and k2 look along +y, k3 along -y. Local y is the
// depth axis; local x is measured so that a positive theta1 maps to the
// world direction used by the relocation formulas.

template <typename Scalar>
Point3<Scalar> to_sensor_local(const RigGeometry<Scalar>& rig, Sensor s,
                               const Point3<Scalar>& world) {
  const Point3<Scalar>& k = rig.vertex(s);
  switch (s) {
    case Sensor::K1: return world;
    case Sensor::K2: return {k.x() - world.x(), world.y(), world.z()};
    case Sensor::K3: return {k.x() - world.x(), k.y() - world.y(), world.z()};
  }
  return world;
}

template <typename Scalar>
Point3<Scalar> from_sensor_local(const RigGeometry<Scalar>& rig, Sensor s,
                                 const Point3<Scalar>& local) {
  // The mapping is an involution up to the vertex translation.
  return to_sensor_local(rig, s, local);
}

/// Relocates a target from one sensor's measurement alone.
template <typename Scalar>
Point3<Scalar> single_sensor_locate(const RigGeometry<Scalar>& rig, Sensor s,
                                    const RawMeasurement<Scalar>& m) {
  using std::tan;
  const Point3<Scalar> local(m.depth * tan(m.theta1), m.depth, m.depth * tan(m.theta2));
  return from_sensor_local(rig, s, local);
}

/// Converts a sensor-local coordinate into the (depth, theta1, theta2) triple.
template <typename Scalar>
RawMeasurement<Scalar> measurement_from_local(const Point3<Scalar>& local) {
  using std::atan;
  if (!(local.y() > 0)) {
    throw Error(Errc::BehindSensor,
                "target local depth " + std::to_string(double(local.y())) + " mm is not positive");
  }
  const Scalar depth = local.y();
  return {depth, atan(local.x() / depth), atan(local.z() / depth)};
}

}  // namespace trilat
