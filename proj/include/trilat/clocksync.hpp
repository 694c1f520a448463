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

#include <cstdint>
#include <span>

namespace trilat {

/// Microseconds on some clock's timeline.
using Micros = std::int64_t;

/// Four timestamps of one request/response exchange: client send (t1),
/// server receive (t2), server send (t3), client receive (t4).
struct SyncSample {
  Micros t1{};
  Micros t2{};
  Micros t3{};
  Micros t4{};

  bool operator==(const SyncSample&) const = default;
};

/// Estimated offset of the server clock relative to a client clock
/// (server = client + offset), with the round-trip delay that bounds it.
struct ClockModel {
  Micros offset{};
  Micros round_trip_delay{};
  Micros error_bound{};  // ceil(round_trip_delay / 2)

  bool operator==(const ClockModel&) const = default;
};

/// Offset/delay from one exchange. Server processing time (t3 - t2) cancels.
/// Throws Errc::InvariantViolation for a malformed sample and
/// Errc::NegativeDelay when the legs imply a negative round trip.
ClockModel estimate_offset(const SyncSample& s);

/// Min-delay filter over the latest `k` samples. Samples that fail
/// estimate_offset are skipped; throws Errc::Empty if none remain.
ClockModel refine(std::span<const SyncSample> samples, std::size_t k);

/// Maps a client timestamp onto the server timeline.
constexpr Micros to_server_time(Micros client_ts, const ClockModel& model) noexcept {
  return client_ts + model.offset;
}

constexpr Micros to_client_time(Micros server_ts, const ClockModel& model) noexcept {
  return server_ts - model.offset;
}

}  // namespace trilat
