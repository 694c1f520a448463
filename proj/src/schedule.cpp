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

#include "trilat/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "trilat/error.hpp"

namespace trilat {
namespace {

Micros floor_div(Micros a, Micros b) noexcept {
  Micros q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

std::optional<std::size_t> ScheduleConfig::position_of(ClientId client) const noexcept {
  const auto it = std::find(clients.begin(), clients.end(), client);
  if (it == clients.end()) return std::nullopt;
  return static_cast<std::size_t>(it - clients.begin());
}

void ScheduleConfig::validate() const {
  if (slot_us <= 0) throw Error(Errc::Config, "schedule.slot_ms must be positive");
  if (clients.empty()) throw Error(Errc::Config, "schedule.clients must not be empty");
  if (std::set<ClientId>(clients.begin(), clients.end()).size() != clients.size()) {
    throw Error(Errc::Config, "schedule.clients contains duplicate ids");
  }
  if (nominal_interframe_us && *nominal_interframe_us <= 0) {
    throw Error(Errc::Config, "schedule.nominal_interframe_ms must be positive");
  }
}

std::int64_t iteration_of(const ScheduleConfig& cfg, Micros t) noexcept {
  return floor_div(t, cfg.iteration_us());
}

SlotOwner slot_for(const ScheduleConfig& cfg, Micros t) {
  const Micros within = t - iteration_of(cfg, t) * cfg.iteration_us();
  const auto position = static_cast<std::size_t>(within / cfg.slot_us);
  if (position < cfg.clients.size()) return SlotOwner::of(cfg.clients[position]);
  return SlotOwner::trilateration();
}

Micros next_send_deadline(const ScheduleConfig& cfg, ClientId client, Micros now) {
  const auto position = cfg.position_of(client);
  if (!position) {
    throw Error(Errc::UnknownClient, "client " + std::to_string(client) + " has no slot");
  }
  const Micros iteration = cfg.iteration_us();
  Micros candidate = iteration_of(cfg, now) * iteration + static_cast<Micros>(*position) * cfg.slot_us;
  if (candidate < now) candidate += iteration;
  return candidate;
}

TimingAnalysis timing_errors(std::span<const Arrival> arrivals, const ScheduleConfig& cfg) {
  TimingAnalysis out;
  std::map<ClientId, const Arrival*> previous;
  const double nominal_ms = static_cast<double>(cfg.nominal_interframe()) / 1000.0;
  std::size_t within = 0;

  for (const Arrival& a : arrivals) {
    auto [it, first] = previous.try_emplace(a.client, &a);
    if (first) continue;
    const Arrival& prev = *it->second;
    if (a.seq != prev.seq + 1) out.gaps.push_back({a.client, prev.seq, a.seq});
    const double interval_ms = static_cast<double>(a.server_time - prev.server_time) / 1000.0;
    const TimingError e{a.client, a.seq, interval_ms - nominal_ms};
    out.errors.push_back(e);
    if (std::abs(e.error_ms) <= 1.0) ++within;
    double& worst = out.max_abs_error_ms[a.client];
    worst = std::max(worst, std::abs(e.error_ms));
    it->second = &a;
  }
  out.fraction_within_1ms =
      out.errors.empty() ? 1.0 : static_cast<double>(within) / static_cast<double>(out.errors.size());
  return out;
}

bool ordering_ok(std::span<const TimingError> errors, const ScheduleConfig& cfg) {
  const double slot_ms = static_cast<double>(cfg.slot_us) / 1000.0;
  return std::all_of(errors.begin(), errors.end(),
                     [slot_ms](const TimingError& e) { return std::abs(e.error_ms) < slot_ms; });
}

}  // namespace trilat
