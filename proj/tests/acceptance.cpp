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

// Acceptance suite: one PASS/FAIL line per criterion. With no arguments every
// criterion runs; otherwise only the numbered ones. Exit status is non-zero
// if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include <unistd.h>

#include "trilat/analysis.hpp"
#include "trilat/artifacts.hpp"
#include "trilat/cli.hpp"
#include "trilat/clocksync.hpp"
#include "trilat/error.hpp"
#include "trilat/simulator.hpp"
#include "trilat/wire.hpp"

using namespace trilat;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

Scene default_scene() {
  return Scene{layout_vertices(6000.0, 5000.0, 5000.0), GaitProfile{}, Placement{}, ZSide::Below};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("trilat_acceptance_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome localization_table() {
  const Point3d o0(915, 4055, 410);
  const std::array<Point3d, 3> singles{Point3d(928.7, 4042.3, 407.3), Point3d(901.3, 4045.4, 404.3),
                                       Point3d(915, 4047.6, 431.5)};
  const AccuracyReport r = localization_errors(o0, singles, Point3d(909.0, 4045.9, 415.5));
  const std::array<double, 4> expected{18.88, 17.73, 22.74, 12.20};
  const std::array<double, 4> got{r.single_error_mm[0], r.single_error_mm[1], r.single_error_mm[2],
                                  r.trilateration_error_mm};
  bool pass = true;
  std::string detail;
  for (std::size_t i = 0; i < 4; ++i) {
    const bool ok = std::abs(got[i] - expected[i]) <= 0.05;
    pass = pass && ok;
    detail += fmt("%s%.3f (want %.2f%s)", i ? ", " : "", got[i], expected[i], ok ? "" : " MISS");
  }
  return {pass, "errors mm: " + detail};
}

Outcome noise_reduction() {
  const auto rig = layout_vertices(6000.0, 5000.0, 5000.0);
  // Equidistant from all three sensors at 4 m, in front of each of them.
  const double ground = 3125.0;  // circumradius of the 6000/5000/5000 triangle
  const Point3d target(3000.0, 875.0, std::sqrt(4000.0 * 4000.0 - ground * ground));
  NoiseModel noise;
  noise.sigma_depth_mm = 10.0;
  noise.sigma_angle_rad = 0.002;

  Rng rng = make_rng(2024, 0);
  std::array<double, 4> sum{};
  std::vector<double> ratios;
  std::size_t failures = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    std::array<RawMeasurementd, 3> m;
    std::array<Point3d, 3> singles;
    for (std::size_t s = 0; s < 3; ++s) {
      m[s] = observe(rig, kSensors[s], target, noise, rng);
      singles[s] = single_sensor_locate(rig, kSensors[s], m[s]);
    }
    Point3d fused;
    try {
      fused = trilaterate(rig, m, ZSide::Above);
    } catch (const Error&) {
      ++failures;
      continue;
    }
    const AccuracyReport r = localization_errors(target, singles, fused);
    for (std::size_t k = 0; k < 4; ++k) sum[k] += r.error_of(static_cast<Method>(k));
    const double single_mean = (r.single_error_mm[0] + r.single_error_mm[1] + r.single_error_mm[2]) / 3.0;
    ratios.push_back(r.trilateration_error_mm / single_mean);
  }
  const double n = static_cast<double>(ratios.size());
  const double tri = sum[3] / n;
  const bool below_each = tri < sum[0] / n && tri < sum[1] / n && tri < sum[2] / n;
  const double ratio = median(ratios);
  const bool pass = failures == 0 && below_each && ratio >= 0.5 && ratio <= 0.95;
  return {pass, fmt("mean mm k1 %.2f k2 %.2f k3 %.2f trilateration %.2f; median ratio %.3f (want [0.5, 0.95]); "
                    "%zu no-intersection",
                    sum[0] / n, sum[1] / n, sum[2] / n, tri, ratio, failures)};
}

Outcome zero_noise_identity() {
  SessionSettings settings;
  settings.duration_s = 60.0;
  const auto t0 = std::chrono::steady_clock::now();
  const SessionArtifacts a = run_session(default_scene(), NoiseModel::none(), settings);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::map<std::pair<std::int64_t, Joint>, Point3d> truth;
  for (const auto& g : a.ground_truth) truth[{g.iteration, g.joint}] = g.position;
  double worst = 0.0;
  for (const auto& p : a.trilaterated) {
    worst = std::max(worst, (p.position - truth.at({p.iteration, p.joint})).norm());
  }
  const bool pass = a.summary.iterations_completed == 1000 && a.trilaterated.size() == 6000 &&
                    worst <= 1e-6 && secs < 10.0;
  return {pass, fmt("%lld iterations, %zu positions, max deviation %.3g mm, %.2f s",
                    static_cast<long long>(a.summary.iterations_completed), a.trilaterated.size(), worst,
                    secs)};
}

Outcome sync_bound() {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<Micros> offset(-50'000, 50'000), leg(0, 500), proc(0, 200);
  std::size_t violations = 0, inexact = 0;
  Micros worst_excess = 0;
  for (int i = 0; i < 1000; ++i) {
    const Micros truth = offset(rng);
    std::vector<SyncSample> burst;
    for (int k = 0; k < 8; ++k) {
      const Micros t = 1'000'000 + k * 5'000, f = leg(rng), b = leg(rng), p = proc(rng);
      burst.push_back({t - truth, t + f, t + f + p, t + f + p + b - truth});
    }
    const ClockModel m = refine(burst, burst.size());
    const Micros err = std::abs(m.offset - truth);
    if (m.round_trip_delay > 1000 || err > m.error_bound) ++violations;
    worst_excess = std::max(worst_excess, err - m.error_bound);

    const Micros f = leg(rng);
    const ClockModel eq = estimate_offset({1'000'000 - truth, 1'000'000 + f, 1'000'000 + f + 10,
                                           1'000'000 + 2 * f + 10 - truth});
    if (eq.offset != truth) ++inexact;
  }
  return {violations == 0 && inexact == 0,
          fmt("1000 bursts: %zu outside +-d/2, %zu inexact equal-leg cases", violations, inexact)};
}

Outcome timing_statistics() {
  const RunConfig cfg = resolve_config({});
  SessionSettings settings = cfg.session;
  settings.duration_s = 67.7;
  const SessionArtifacts a = run_session(cfg.scene(), cfg.noise, settings);
  const TimingAnalysis t = timing_errors(a.events, settings.schedule);
  const TimingReport r = timing_report(t.errors);
  double worst = 0.0;
  for (const auto& [c, v] : r.max_error_ms) worst = std::max(worst, v);

  // Brute-force recount from the event log on disk.
  const fs::path dir = scratch("timing");
  write_events(dir / kEventsFile, a.events);
  std::ifstream in(dir / kEventsFile);
  std::map<long long, long long> last;
  std::size_t total = 0, within = 0;
  for (std::string line; std::getline(in, line);) {
    const auto num = [&](const char* key) {
      return std::stoll(line.substr(line.find(key) + std::string(key).size()));
    };
    const long long c = num("\"client\":"), ts = num("\"server_time_us\":");
    if (last.count(c)) {
      ++total;
      within += std::llabs(ts - last[c] - 60'000) <= 1000 ? 1 : 0;
    }
    last[c] = ts;
  }
  const double recount = static_cast<double>(within) / static_cast<double>(total);
  const bool pass = r.fraction_within_1ms >= 0.98 && worst < 15.0 && total == r.frame_count &&
                    recount == r.fraction_within_1ms;
  return {pass, fmt("%zu frames, %.2f %% within 1 ms (recount %.2f %%), max |error| ms: c1 %.3f c2 %.3f c3 %.3f",
                    r.frame_count, 100.0 * r.fraction_within_1ms, 100.0 * recount,
                    r.max_error_ms.count(1) ? r.max_error_ms.at(1) : 0.0,
                    r.max_error_ms.count(2) ? r.max_error_ms.at(2) : 0.0,
                    r.max_error_ms.count(3) ? r.max_error_ms.at(3) : 0.0)};
}

Outcome wire_format() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> depth(1e-3, 1e5), ang(-1.5707, 1.5707);
  std::size_t mismatches = 0;
  for (int i = 0; i < 100000; ++i) {
    JointFrame f;
    f.client_id = static_cast<ClientId>(1 + rng() % 3);
    f.seq = static_cast<std::uint32_t>(rng());
    f.client_ts = rng();
    for (auto& m : f.joints) m = {depth(rng), ang(rng), ang(rng)};
    const Bytes b = encode_frame(f);
    if (b.size() != kHeaderSize + 157 || encode_frame(decode_frame(b)) != b) ++mismatches;
  }

  JointFrame good;
  for (auto& m : good.joints) m = {1000.0, 0.0, 0.0};
  const Bytes base = encode_frame(good);
  auto code = [](const Bytes& b) -> std::string {
    try {
      decode_frame(b);
    } catch (const Error& e) {
      return std::string(to_string(e.code()));
    }
    return "accepted";
  };
  Bytes magic = base, version = base, type = base, invalid = base;
  magic[1] = 'X';
  version[4] = 7;
  type[5] = 200;
  const double neg = -1.0;
  std::memcpy(invalid.data() + kHeaderSize + 13, &neg, 8);
  const std::vector<std::pair<std::string, std::string>> cases{
      {"BadMagic", code(magic)},
      {"Truncated", code(Bytes(base.begin(), base.begin() + 10))},
      {"BadVersion", code(version)},
      {"UnknownType", code(type)},
      {"InvariantViolation", code(invalid)},
  };
  bool distinct = true;
  std::string detail;
  for (const auto& [want, got] : cases) {
    distinct = distinct && want == got;
    detail += " " + got;
  }
  return {mismatches == 0 && distinct,
          fmt("%zu/100000 round-trip mismatches; error cases:", mismatches) + detail};
}

Outcome determinism() {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  std::ostringstream sink;
  const int ca = run_cli({"trilat", "simulate", "--seed", "11", "--out", a.string()}, sink, sink);
  const int cb = run_cli({"trilat", "simulate", "--seed", "11", "--out", b.string()}, sink, sink);
  const bool tri = slurp(a / kTrilateratedFile) == slurp(b / kTrilateratedFile);
  const bool rep = slurp(a / kReportFile) == slurp(b / kReportFile);
  const bool nonempty = slurp(a / kTrilateratedFile).size() > 1000;
  return {ca == 0 && cb == 0 && tri && rep && nonempty,
          fmt("trilaterated.csv %s, report.json %s", tri ? "identical" : "DIFFERENT",
              rep ? "identical" : "DIFFERENT")};
}

Outcome trace_machinery() {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> unit(0.0, 1.0);
  const Eigen::Index n = 1000;
  Trace a, b;
  std::map<Joint, Eigen::Vector3d> injected;
  double worst = 0.0, sampling_worst = 0.0;
  int k = 0;
  for (Joint j : kJoints) {
    Eigen::MatrixX3d base(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int c = 0; c < 3; ++c) base(i, c) = 500.0 * std::sin(0.01 * double(i) + c) + 100.0 * c;
    }
    const Eigen::Vector3d sd_cm(0.5 + 0.3 * k, 1.0 + 0.2 * k, 4.0 - 0.5 * k);
    // Draws are rescaled so the injected difference has exactly the stated
    // population std; the raw N(0, sd) draws are kept for the sampling view.
    Eigen::MatrixX3d noise(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int c = 0; c < 3; ++c) noise(i, c) = 10.0 * sd_cm[c] * unit(rng);
    }
    Eigen::MatrixX3d other = base + noise;
    for (int c = 0; c < 3; ++c) {
      const Eigen::ArrayXd centred = noise.col(c).array() - noise.col(c).mean();
      const double realised = std::sqrt(centred.square().mean()) / 10.0;
      sampling_worst = std::max(sampling_worst, std::abs(realised - sd_cm[c]) / sd_cm[c]);
      other.col(c) = base.col(c) + (centred * (sd_cm[c] / realised)).matrix();
    }
    a.joints[j] = other;
    b.joints[j] = base;
    injected[j] = sd_cm;
    ++k;
  }
  const TraceDiffReport r = trace_diff_std(a, b);
  for (const auto& [j, sd] : injected) {
    worst = std::max(worst, ((r.std_cm.at(j) - sd).array().abs() / sd.array()).maxCoeff());
  }
  const TraceDiffReport same = trace_diff_std(b, b);
  bool zero = same.total_cm == 0.0 && same.mean_of_stds_cm == 0.0;
  for (const auto& [j, s] : same.std_cm) zero = zero && s.isZero(0.0);
  return {worst <= 0.05 && zero,
          fmt("worst relative deviation %.3f %% (limit 5 %%; raw draws vs generating sd %.2f %%), "
              "identical traces %s",
              100.0 * worst, 100.0 * sampling_worst, zero ? "all zero" : "NON-ZERO")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"reference localization distances", localization_table},
      {"noise reduction by trilateration", noise_reduction},
      {"zero-noise end-to-end identity", zero_noise_identity},
      {"sync bound soundness", sync_bound},
      {"timing statistics", timing_statistics},
      {"wire format", wire_format},
      {"determinism", determinism},
      {"trace difference machinery", trace_machinery},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty()) {
    for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) selected.push_back(i);
  }

  int failed = 0;
  for (int id : selected) {
    if (id < 1 || id > static_cast<int>(criteria.size())) {
      std::printf("criterion %d: FAIL unknown criterion\n", id);
      ++failed;
      continue;
    }
    const auto& [name, run] = criteria[static_cast<std::size_t>(id - 1)];
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d: %s %s: %s\n", id, o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
