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

#include "doctest.h"

#include <Eigen/Geometry>

#include <cmath>
#include <numeric>
#include <random>

#include "trilat/analysis.hpp"
#include "trilat/error.hpp"

using namespace trilat;

namespace {

const Point3d kO0(915, 4055, 410);
const std::array<Point3d, 3> kSingles{Point3d(928.7, 4042.3, 407.3), Point3d(901.3, 4045.4, 404.3),
                                      Point3d(915, 4047.6, 431.5)};
const Point3d kFused(909.0, 4045.9, 415.5);

// Reference population std with a two-pass loop.
double ref_std(const std::vector<double>& xs) {
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size()));
}

Trace random_trace(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> walk(0.0, 50.0);
  Trace t;
  for (Joint j : kJoints) {
    Eigen::MatrixX3d m(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int c = 0; c < 3; ++c) m(i, c) = 1000.0 * c + walk(rng);
    }
    t.joints[j] = m;
  }
  return t;
}

}  // namespace

TEST_CASE("reference localization distances") {
  const AccuracyReport r = localization_errors(kO0, kSingles, kFused);
  CHECK(std::abs(r.single_error_mm[0] - 18.88) <= 0.05);
  CHECK(r.single_error_mm[1] == doctest::Approx(std::sqrt(13.7 * 13.7 + 9.6 * 9.6 + 5.7 * 5.7)));
  CHECK(std::abs(r.single_error_mm[2] - 22.74) <= 0.05);
  CHECK(std::abs(r.trilateration_error_mm - 12.20) <= 0.05);
  CHECK(r.winner == Method::Trilateration);
}

TEST_CASE("identity, ties and invariance") {
  const AccuracyReport zero = localization_errors(kO0, {kO0, kO0, kO0}, kO0);
  CHECK(zero.trilateration_error_mm == 0.0);
  CHECK(zero.winner == Method::K1);

  const AccuracyReport base = localization_errors(kO0, kSingles, kFused);
  const Eigen::Matrix3d rot = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
  const Eigen::Vector3d shift(-300, 1200, 55);
  auto move = [&](const Point3d& p) -> Point3d { return rot * p + shift; };
  const AccuracyReport moved =
      localization_errors(move(kO0), {move(kSingles[0]), move(kSingles[1]), move(kSingles[2])}, move(kFused));
  for (Method m : {Method::K1, Method::K2, Method::K3, Method::Trilateration}) {
    CHECK(moved.error_of(m) == doctest::Approx(base.error_of(m)).epsilon(1e-12));
  }
  CHECK(moved.winner == base.winner);
}

TEST_CASE("trace diff examples") {
  std::mt19937_64 rng(3);
  const Trace a = random_trace(rng, 1000);

  const TraceDiffReport same = trace_diff_std(a, a);
  for (const auto& [j, s] : same.std_cm) CHECK(s.isZero());
  CHECK(same.total_cm == 0.0);
  CHECK(same.mean_of_stds_cm == 0.0);

  Trace shifted = a;
  shifted.joints[Joint::LeftKnee].col(0).array() += 50.0;  // 5 cm
  const TraceDiffReport offset = trace_diff_std(a, shifted);
  CHECK(offset.std_cm.at(Joint::LeftKnee).x() == doctest::Approx(0.0));

  Trace noisy = a;
  std::normal_distribution<double> diff(0.0, 20.0);  // 2 cm
  for (Eigen::Index i = 0; i < 1000; ++i) noisy.joints[Joint::RightAnkle](i, 1) += diff(rng);
  const TraceDiffReport r = trace_diff_std(noisy, a);
  CHECK(std::abs(r.std_cm.at(Joint::RightAnkle).y() - 2.0) <= 0.1);
  CHECK(r.std_cm.at(Joint::RightAnkle).x() == 0.0);
}

TEST_CASE("trace diff aggregation matches reference loops") {
  std::mt19937_64 rng(8);
  const Trace a = random_trace(rng, 400), b = random_trace(rng, 400);
  const TraceDiffReport r = trace_diff_std(a, b);
  std::vector<double> pooled;
  double sum = 0;
  for (Joint j : kJoints) {
    for (int c = 0; c < 3; ++c) {
      std::vector<double> d;
      for (Eigen::Index i = 0; i < 400; ++i) d.push_back((a.joints.at(j)(i, c) - b.joints.at(j)(i, c)) / 10.0);
      CHECK(r.std_cm.at(j)[c] == doctest::Approx(ref_std(d)).epsilon(1e-12));
      sum += ref_std(d);
      pooled.insert(pooled.end(), d.begin(), d.end());
    }
  }
  CHECK(r.total_cm == doctest::Approx(ref_std(pooled)).epsilon(1e-12));
  CHECK(r.mean_of_stds_cm == doctest::Approx(sum / 18.0).epsilon(1e-12));
}

TEST_CASE("trace diff symmetry and common-mode invariance") {
  std::mt19937_64 rng(13);
  const Trace a = random_trace(rng, 300), b = random_trace(rng, 300), c = random_trace(rng, 300);
  const TraceDiffReport ab = trace_diff_std(a, b), ba = trace_diff_std(b, a);
  Trace ac = a, bc = b;
  for (Joint j : kJoints) {
    ac.joints[j] += c.joints.at(j);
    bc.joints[j] += c.joints.at(j);
  }
  const TraceDiffReport common = trace_diff_std(ac, bc);
  for (Joint j : kJoints) {
    CHECK(ab.std_cm.at(j).isApprox(ba.std_cm.at(j), 1e-12));
    CHECK(ab.std_cm.at(j).isApprox(common.std_cm.at(j), 1e-9));
  }
  CHECK(ab.total_cm == doctest::Approx(ba.total_cm).epsilon(1e-12));
}

TEST_CASE("trace length mismatch") {
  std::mt19937_64 rng(1);
  const Trace a = random_trace(rng, 10);
  Trace shorter = a;
  shorter.joints[Joint::LeftHip] = a.joints.at(Joint::LeftHip).topRows(9);
  CHECK_THROWS_AS(trace_diff_std(a, shorter), Error);
  Trace missing = a;
  missing.joints.erase(Joint::RightHip);
  try {
    trace_diff_std(a, missing);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::LengthMismatch);
  }
  Trace one;
  one.joints[Joint::LeftHip] = Eigen::MatrixX3d::Zero(1, 3);
  CHECK_THROWS_AS(trace_diff_std(one, one), Error);
}

TEST_CASE("timing report: 4518 frames with 74 over 1 ms") {
  std::vector<TimingError> errors;
  for (std::uint32_t i = 0; i < 4518; ++i) {
    const ClientId c = static_cast<ClientId>(1 + i % 3);
    errors.push_back({c, i, i < 74 ? 1.5 + (i % 6) : 0.25});
  }
  const TimingReport r = timing_report(errors, 67'725'000);
  CHECK(r.frame_count == 4518);
  CHECK(r.fraction_within_1ms == doctest::Approx(4444.0 / 4518.0));
  CHECK(std::abs(100.0 * r.fraction_within_1ms - 98.37) < 0.01);
  CHECK(r.span_s == doctest::Approx(67.725));
  CHECK(std::accumulate(r.histogram.begin(), r.histogram.end(), 0.0) == doctest::Approx(1.0));
}

TEST_CASE("timing report buckets and maxima") {
  const std::vector<TimingError> errors{{1, 2, 0.0},  {1, 3, -1.0}, {2, 2, 1.5},
                                        {2, 3, -8.0}, {3, 2, 8.01}, {3, 3, 3.0}};
  const TimingReport r = timing_report(errors);
  CHECK(r.histogram[0] == doctest::Approx(2.0 / 6));
  CHECK(r.histogram[1] == doctest::Approx(1.0 / 6));
  CHECK(r.histogram[2] == doctest::Approx(1.0 / 6));
  CHECK(r.histogram[7] == doctest::Approx(1.0 / 6));
  CHECK(r.histogram[8] == doctest::Approx(1.0 / 6));
  CHECK(r.max_error_ms.at(1) == 1.0);
  CHECK(r.max_error_ms.at(2) == 8.0);
  CHECK(r.max_error_ms.at(3) == 8.01);

  const std::vector<TimingError> zeros(50, TimingError{1, 2, 0.0});
  CHECK(timing_report(zeros).fraction_within_1ms == 1.0);
  CHECK(timing_report({}).frame_count == 0);
}

TEST_CASE("population std") {
  const std::vector<double> xs{2, 4, 4, 4, 5, 5, 7, 9};
  CHECK(population_std(xs) == 2.0);
  CHECK(population_std({}) == 0.0);
}
