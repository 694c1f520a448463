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

#include <cmath>
#include <random>
#include <vector>

#include "trilat/clocksync.hpp"
#include "trilat/error.hpp"

using namespace trilat;

namespace {

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::Io;
}

// One exchange against a client whose clock reads true time minus `offset`
// (so server = client + offset), with the given legs and processing time.
SyncSample exchange(Micros t_true, Micros offset, Micros fwd, Micros proc, Micros back) {
  const Micros t1 = t_true - offset;
  const Micros t2 = t_true + fwd;
  const Micros t3 = t2 + proc;
  const Micros t4 = t3 + back - offset;
  return {t1, t2, t3, t4};
}

}  // namespace

TEST_CASE("estimate_offset examples") {
  const ClockModel a = estimate_offset({100, 110, 112, 106});
  CHECK(a.offset == 8);
  CHECK(a.round_trip_delay == 4);
  CHECK(a.error_bound == 2);

  const ClockModel b = estimate_offset({0, 5, 6, 11});
  CHECK(b.offset == 0);
  CHECK(b.round_trip_delay == 10);

  CHECK(estimate_offset({0, 5, 5, 10}) == estimate_offset({0, 5, 905, 910}));
}

TEST_CASE("malformed samples") {
  CHECK(code_of([] { estimate_offset({10, 5, 6, 9}); }) == Errc::InvariantViolation);   // t4 < t1
  CHECK(code_of([] { estimate_offset({0, 6, 5, 9}); }) == Errc::InvariantViolation);    // t3 < t2
  // Server stamps imply it spent longer than the whole client round trip.
  CHECK(code_of([] { estimate_offset({0, 100, 200, 50}); }) == Errc::NegativeDelay);
}

TEST_CASE("refine examples") {
  const std::vector<SyncSample> one{{0, 5, 6, 11}};
  CHECK(refine(one, 1) == estimate_offset(one[0]));

  const std::vector<SyncSample> two{{0, 8, 9, 17}, {0, 5, 6, 11}};
  const ClockModel m = refine(two, 2);
  CHECK(m.round_trip_delay == 10);
  CHECK(m.offset == 0);

  // k limits the window to the latest samples.
  const std::vector<SyncSample> window{{0, 5, 6, 11}, {0, 8, 9, 17}};
  CHECK(refine(window, 1).round_trip_delay == 16);

  const std::vector<SyncSample> bad{{0, 100, 200, 50}};
  CHECK(code_of([&] { refine(bad, 1); }) == Errc::Empty);
  CHECK(code_of([] { refine({}, 3); }) == Errc::Empty);
  // Invalid samples are skipped, not fatal.
  const std::vector<SyncSample> mixed{{0, 5, 6, 11}, {0, 100, 200, 50}};
  CHECK(refine(mixed, 2).round_trip_delay == 10);
}

TEST_CASE("refine recovers a known offset") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<Micros> leg(100, 1000), proc(0, 500);
  std::vector<SyncSample> samples;
  Micros min_delay = 1'000'000;
  for (int i = 0; i < 100; ++i) {
    const Micros f = leg(rng), b = leg(rng);
    samples.push_back(exchange(5'000'000 + i * 10'000, 8000, f, proc(rng), b));
    min_delay = std::min(min_delay, f + b);
  }
  const ClockModel m = refine(samples, samples.size());
  CHECK(m.round_trip_delay == min_delay);
  CHECK(std::abs(m.offset - 8000) * 2 <= min_delay);
}

TEST_CASE("bound soundness and equal-leg exactness") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<Micros> off(-50'000, 50'000), leg(0, 500), proc(0, 300);
  for (int i = 0; i < 20000; ++i) {
    const Micros o = off(rng), f = leg(rng), b = leg(rng);
    const ClockModel m = estimate_offset(exchange(1'000'000, o, f, proc(rng), b));
    CHECK(m.round_trip_delay == f + b);
    CHECK(std::abs(m.offset - o) <= m.error_bound);
    CHECK(2 * std::abs(m.offset - o) <= m.round_trip_delay + 1);
    const ClockModel eq = estimate_offset(exchange(1'000'000, o, f, proc(rng), f));
    CHECK(eq.offset == o);
  }
}

TEST_CASE("time mapping") {
  const ClockModel plus{8, 0, 0}, minus{-8, 0, 0};
  CHECK(to_server_time(1000, plus) == 1008);
  CHECK(to_server_time(1000, minus) == 992);
  CHECK(to_client_time(to_server_time(123456, plus), plus) == 123456);
  static_assert(to_server_time(1, ClockModel{2, 0, 0}) == 3);
}

TEST_CASE("drift: models 60 s apart bracket the true mapping") {
  // Client clock: local(T) = T + 12000 + 50 ppm * T. Server clock is true time.
  const auto local = [](Micros t) { return t + 12'000 + std::llround(static_cast<double>(t) * 50e-6); };
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<Micros> leg(150, 900);

  std::vector<ClockModel> models;
  std::vector<Micros> truth;
  for (Micros start : {1'000'000LL, 61'000'000LL}) {
    std::vector<SyncSample> burst;
    for (int i = 0; i < 8; ++i) {
      const Micros t = start + i * 5'000;
      const Micros f = leg(rng), b = leg(rng);
      burst.push_back({local(t), t + f, t + f + 20, local(t + f + 20 + b)});
    }
    models.push_back(refine(burst, burst.size()));
    truth.push_back(start - local(start));
  }
  for (std::size_t i = 0; i < 2; ++i) {
    // Drift across one 40 ms burst adds at most 2 µs to the ±d/2 bound.
    CHECK(std::abs(models[i].offset - truth[i]) <= models[i].error_bound + 2);
  }
  // 60 s at 50 ppm separates the two mappings by 3 ms.
  CHECK(truth[0] - truth[1] == 3000);
  const Micros bounds = models[0].error_bound + models[1].error_bound + 4;
  CHECK(std::abs((models[0].offset - models[1].offset) - 3000) <= bounds);
}
