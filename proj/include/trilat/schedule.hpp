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
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "trilat/clocksync.hpp"

namespace trilat {

using ClientId = std::uint8_t;

/// Fixed slotted transmission plan: one slot per client in order, optionally
/// followed by a trilateration slot. All times are session-relative µs.
struct ScheduleConfig {
  Micros slot_us = 15'000;
  std::vector<ClientId> clients{1, 2, 3};
  bool trilateration_slot = true;
  std::optional<Micros> nominal_interframe_us;  // defaults to the iteration length

  Micros iteration_us() const noexcept {
    return slot_us * static_cast<Micros>(clients.size() + (trilateration_slot ? 1 : 0));
  }
  Micros nominal_interframe() const noexcept {
    return nominal_interframe_us.value_or(iteration_us());
  }
  /// Start of the window in which iteration `k` is closed and trilaterated.
  Micros assembly_deadline(std::int64_t iteration) const noexcept {
    return iteration * iteration_us() + slot_us * static_cast<Micros>(clients.size());
  }
  std::optional<std::size_t> position_of(ClientId client) const noexcept;

  /// Throws Errc::Config on a non-positive slot, no clients or duplicate ids.
  void validate() const;
};

struct SlotOwner {
  enum class Kind { Client, Trilateration };
  Kind kind = Kind::Client;
  ClientId client = 0;

  static SlotOwner trilateration() { return {Kind::Trilateration, 0}; }
  static SlotOwner of(ClientId id) { return {Kind::Client, id}; }
  bool is_trilateration() const noexcept { return kind == Kind::Trilateration; }
  bool operator==(const SlotOwner&) const = default;
};

/// Owner of the slot containing session time `t`.
SlotOwner slot_for(const ScheduleConfig& cfg, Micros t);

/// Index of the iteration containing session time `t` (floor division).
std::int64_t iteration_of(const ScheduleConfig& cfg, Micros t) noexcept;

/// Earliest time >= now at which `client`'s slot starts. Throws Errc::UnknownClient.
Micros next_send_deadline(const ScheduleConfig& cfg, ClientId client, Micros now);

/// One frame arrival as logged by the server.
struct Arrival {
  ClientId client = 0;
  std::uint32_t seq = 0;
  Micros server_time = 0;

  bool operator==(const Arrival&) const = default;
};

struct TimingError {
  ClientId client = 0;
  std::uint32_t seq = 0;
  double error_ms = 0.0;  // actual inter-frame interval minus nominal

  bool operator==(const TimingError&) const = default;
};

struct SequenceGap {
  ClientId client = 0;
  std::uint32_t after_seq = 0;
  std::uint32_t next_seq = 0;
};

struct TimingAnalysis {
  std::vector<TimingError> errors;
  std::vector<SequenceGap> gaps;
  double fraction_within_1ms = 1.0;
  std::map<ClientId, double> max_abs_error_ms;
};

/// Inter-frame timing errors per client, in arrival-log order.
TimingAnalysis timing_errors(std::span<const Arrival> arrivals, const ScheduleConfig& cfg);

/// True iff every |error| is strictly below the slot length.
bool ordering_ok(std::span<const TimingError> errors, const ScheduleConfig& cfg);

}  // namespace trilat
