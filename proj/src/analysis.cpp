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

#include "trilat/analysis.hpp"

#include <cmath>
#include <numeric>

#include "trilat/error.hpp"

namespace trilat {

AccuracyReport localization_errors(const Point3d& reference, const std::array<Point3d, 3>& singles,
                                   const Point3d& trilaterated) {
  AccuracyReport r;
  for (std::size_t i = 0; i < 3; ++i) r.single_error_mm[i] = (reference - singles[i]).norm();
  r.trilateration_error_mm = (reference - trilaterated).norm();

  r.winner = Method::K1;
  for (Method m : {Method::K2, Method::K3, Method::Trilateration}) {
    if (r.error_of(m) < r.error_of(r.winner)) r.winner = m;
  }
  return r;
}

double population_std(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / n);
}

TraceDiffReport trace_diff_std(const Trace& a, const Trace& b) {
  if (a.joints.size() != b.joints.size() || a.joints.empty()) {
    throw Error(Errc::LengthMismatch, "traces cover different joints");
  }
  TraceDiffReport r;
  std::vector<double> pooled;
  double std_sum = 0.0;
  for (const auto& [joint, rows_a] : a.joints) {
    const auto it = b.joints.find(joint);
    if (it == b.joints.end()) {
      throw Error(Errc::LengthMismatch, std::string(joint_name(joint)) + " missing from one trace");
    }
    const Eigen::MatrixX3d& rows_b = it->second;
    if (rows_a.rows() != rows_b.rows() || rows_a.rows() < 2) {
      throw Error(Errc::LengthMismatch, std::string(joint_name(joint)) + ": " +
                                            std::to_string(rows_a.rows()) + " vs " +
                                            std::to_string(rows_b.rows()) + " samples");
    }
    const Eigen::MatrixX3d diff_cm = (rows_a - rows_b) / 10.0;
    const Eigen::RowVector3d mean = diff_cm.colwise().mean();
    const Eigen::Vector3d stds =
        ((diff_cm.rowwise() - mean).array().square().colwise().sum() / double(diff_cm.rows()))
            .sqrt()
            .transpose();
    r.std_cm[joint] = stds;
    std_sum += stds.sum();
    pooled.insert(pooled.end(), diff_cm.data(), diff_cm.data() + diff_cm.size());
  }
  r.total_cm = population_std(pooled);
  r.mean_of_stds_cm = std_sum / (3.0 * static_cast<double>(a.joints.size()));
  return r;
}

TimingReport timing_report(std::span<const TimingError> errors, Micros span_us) {
  TimingReport r;
  r.frame_count = errors.size();
  r.span_s = static_cast<double>(span_us) * 1e-6;
  if (errors.empty()) return r;

  std::array<std::size_t, 9> counts{};
  std::size_t within = 0;
  for (const TimingError& e : errors) {
    const double mag = std::abs(e.error_ms);
    if (mag <= 1.0) ++within;
    const std::size_t bucket =
        mag > 8.0 ? 8 : (mag <= 1.0 ? 0 : static_cast<std::size_t>(std::ceil(mag)) - 1);
    ++counts[bucket];
    double& worst = r.max_error_ms[e.client];
    worst = std::max(worst, mag);
  }
  const double n = static_cast<double>(errors.size());
  r.fraction_within_1ms = static_cast<double>(within) / n;
  for (std::size_t i = 0; i < counts.size(); ++i) r.histogram[i] = static_cast<double>(counts[i]) / n;
  return r;
}

}  // namespace trilat
