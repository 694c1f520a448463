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
#include <map>
#include <span>
#include <vector>

#include "trilat/geometry.hpp"
#include "trilat/schedule.hpp"
#include "trilat/wire.hpp"

namespace trilat {

enum class Method { K1, K2, K3, Trilateration };

struct AccuracyReport {
  std::array<double, 3> single_error_mm{};
  double trilateration_error_mm = 0.0;
  Method winner = Method::Trilateration;

  double error_of(Method m) const noexcept {
    return m == Method::Trilateration ? trilateration_error_mm
                                      : single_error_mm[static_cast<std::size_t>(m)];
  }
};

/// Euclidean error of each single-sensor relocation and of the fused
/// position against a reference. Ties favour the earlier method.
AccuracyReport localization_errors(const Point3d& reference, const std::array<Point3d, 3>& singles,
                                   const Point3d& trilaterated);

/// Time-aligned joint trajectories in mm; one row per sample, columns x, y, z.
struct Trace {
  std::map<Joint, Eigen::MatrixX3d> joints;
};

struct TraceDiffReport {
  std::map<Joint, Eigen::Vector3d> std_cm;  // population std of (a - b) per axis
  double total_cm = 0.0;                    // pooled over every joint-axis sample
  double mean_of_stds_cm = 0.0;
};

/// Standard deviation of the difference between two traces, in cm.
/// Throws Errc::LengthMismatch unless both cover the same joints with equal,
/// at least two-sample, lengths.
TraceDiffReport trace_diff_std(const Trace& a, const Trace& b);

struct TimingReport {
  std::size_t frame_count = 0;
  double fraction_within_1ms = 1.0;
  std::map<ClientId, double> max_error_ms;  // largest |error| per client
  /// |error| buckets: [0,1], (1,2], ..., (7,8], (8,inf), as fractions of frames.
  std::array<double, 9> histogram{};
  double span_s = 0.0;
};

inline constexpr std::array<const char*, 9> kHistogramLabels{
    "<=1", "1-2", "2-3", "3-4", "4-5", "5-6", "6-7", "7-8", ">8"};

TimingReport timing_report(std::span<const TimingError> errors, Micros span_us = 0);

/// Population standard deviation (n divisor).
double population_std(std::span<const double> xs);

}  // namespace trilat
