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

#include "trilat/clocksync.hpp"

#include <algorithm>
#include <optional>
#include <string>

#include "trilat/error.hpp"

namespace trilat {

ClockModel estimate_offset(const SyncSample& s) {
  if (s.t4 < s.t1 || s.t3 < s.t2) {
    throw Error(Errc::InvariantViolation, "sync sample timestamps out of order");
  }
  const Micros forward = s.t2 - s.t1;
  const Micros back = s.t4 - s.t3;
  const Micros delay = forward + back;
  if (delay < 0) {
    throw Error(Errc::NegativeDelay, "round trip delay " + std::to_string(delay) + " us");
  }
  // forward - back and delay share parity, so the halved offset is exact for
  // even delays and off by half a microsecond otherwise; the bound rounds up.
  return {(forward - back) / 2, delay, (delay + 1) / 2};
}

ClockModel refine(std::span<const SyncSample> samples, std::size_t k) {
  if (k == 0) {
    throw Error(Errc::InvariantViolation, "refine needs k >= 1");
  }
  const auto latest = samples.last(std::min(k, samples.size()));
  std::optional<ClockModel> best;
  for (const SyncSample& s : latest) {
    try {
      const ClockModel m = estimate_offset(s);
      if (!best || m.round_trip_delay < best->round_trip_delay) best = m;
    } catch (const Error&) {
      // discarded sample
    }
  }
  if (!best) {
    throw Error(Errc::Empty, "no valid sync samples");
  }
  return *best;
}

}  // namespace trilat
