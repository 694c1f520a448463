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
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "trilat/clocksync.hpp"
#include "trilat/geometry.hpp"
#include "trilat/schedule.hpp"
#include "trilat/wire.hpp"

namespace trilat {

using ConnectionId = std::uint32_t;

struct TrilateratedPosition {
  std::int64_t iteration = 0;
  Joint joint = Joint::LeftHip;
  Point3d position = Point3d::Zero();
  Micros server_time = 0;
};

/// Receives everything the server produces during a session.
class SessionSink {
 public:
  virtual ~SessionSink() = default;
  virtual void on_position(const TrilateratedPosition& p) = 0;
  virtual void on_arrival(const Arrival& a) = 0;
};

class MemorySink final : public SessionSink {
 public:
  void on_position(const TrilateratedPosition& p) override { positions.push_back(p); }
  void on_arrival(const Arrival& a) override { arrivals.push_back(a); }

  std::vector<TrilateratedPosition> positions;
  std::vector<Arrival> arrivals;
};

struct ServerConfig {
  ScheduleConfig schedule;
  std::int64_t iterations = 0;
  ZSide side = ZSide::Above;
  Micros start_lead_us = 100'000;  // epoch = time the last client is ready + lead
};

struct SessionSummary {
  std::int64_t iterations_planned = 0;
  std::int64_t iterations_completed = 0;
  std::int64_t iterations_skipped = 0;
  std::uint64_t frames_received = 0;
  std::uint64_t frames_late = 0;
  std::uint64_t frames_duplicate = 0;
  std::uint64_t frames_rejected = 0;  // unattributable or from the wrong connection
  std::uint64_t frames_out_of_slot = 0;  // accepted, but arrived outside the sender's slot
  std::uint64_t sequence_gaps = 0;
  std::uint64_t positions_emitted = 0;
  std::uint64_t trilateration_failures = 0;
  std::uint64_t sync_requests_answered = 0;
  std::uint64_t connections_refused = 0;
  std::vector<ClientId> clients_lost;
  std::optional<Micros> epoch;
};

/// Bytes to write on a connection, optionally closing it afterwards.
struct Outgoing {
  ConnectionId conn = 0;
  Bytes bytes;
  bool close_after = false;
};

/// Transport-independent server: handshake, sync responder, per-iteration
/// frame assembly and trilateration. All times are server-clock µs.
///
/// Frames are attributed to an iteration by their sync-corrected capture
/// timestamp. A frame that reaches the server after its iteration's
/// assembly deadline is dropped; an iteration missing any client is skipped.
class ServerCore {
 public:
  ServerCore(ServerConfig cfg, RigGeometryd rig, SessionSink& sink);

  /// `received` stamps t2 and the arrival log; `now` stamps t3.
  std::vector<Outgoing> on_message(ConnectionId conn, std::span<const std::uint8_t> bytes,
                                   Micros received, Micros now);
  std::vector<Outgoing> on_disconnect(ConnectionId conn, Micros now);

  /// Server time of the next iteration to close, once the session has started.
  std::optional<Micros> next_deadline() const;
  void advance(Micros now);

  bool started() const noexcept { return summary_.epoch.has_value(); }
  bool all_iterations_closed() const noexcept;
  /// Registered clients still connected without having said goodbye.
  std::size_t active_clients() const noexcept;
  const SessionSummary& summary() const noexcept { return summary_; }
  const ServerConfig& config() const noexcept { return cfg_; }

 private:
  struct Peer {
    ClientId id = 0;
    bool ready = false;
    bool said_bye = false;
    std::optional<std::uint32_t> last_seq;
  };

  std::vector<Outgoing> handle_control(ConnectionId conn, const SessionControl& c, Micros now);
  void handle_frame(ConnectionId conn, const JointFrame& f, Micros received);
  void close_iteration(std::int64_t k, Micros now);

  ServerConfig cfg_;
  RigGeometryd rig_;
  SessionSink& sink_;
  SessionSummary summary_;
  std::map<ConnectionId, Peer> peers_;
  std::set<ClientId> registered_;
  std::map<std::int64_t, std::map<ClientId, JointFrame>> pending_;
  std::int64_t next_to_close_ = 0;
};

/// Produces the sensor reading a client sends for a given iteration.
class MeasurementSource {
 public:
  virtual ~MeasurementSource() = default;
  /// nullopt once the source has nothing more to give.
  virtual std::optional<JointMeasurements> read(std::int64_t iteration) = 0;
};

struct ClientConfig {
  ClientId id = 1;
  ScheduleConfig schedule;
  std::int64_t iterations = 0;
  bool sync_enabled = true;
  std::size_t sync_burst = 8;
  Micros resync_interval_us = 10'000'000;
  Micros acquisition_us = 3'000;
};

struct ClientSummary {
  std::uint32_t frames_sent = 0;
  std::uint32_t sync_bursts = 0;
  ClockModel model;
  bool refused = false;
  bool source_exhausted = false;
};

/// Transport-independent client. All times are local-clock µs.
class ClientCore {
 public:
  ClientCore(ClientConfig cfg, MeasurementSource& source);

  std::vector<Bytes> start(Micros now);
  std::vector<Bytes> on_message(std::span<const std::uint8_t> bytes, Micros now);
  /// Local time at which on_timer must next be called.
  std::optional<Micros> next_wakeup() const;
  std::vector<Bytes> on_timer(Micros now);

  bool finished() const noexcept { return state_ == State::Done || state_ == State::Refused; }
  bool refused() const noexcept { return state_ == State::Refused; }
  const ClientSummary& summary() const noexcept { return summary_; }
  const ClockModel& model() const noexcept { return summary_.model; }

 private:
  enum class State { Connecting, Syncing, Ready, Running, Done, Refused };

  Bytes begin_burst(Micros now);
  Micros deadline_for(std::int64_t iteration) const;

  ClientConfig cfg_;
  MeasurementSource& source_;
  ClientSummary summary_;
  State state_ = State::Connecting;
  bool burst_active_ = false;
  std::vector<SyncSample> burst_;
  Micros last_sync_ = 0;
  std::optional<Micros> epoch_;
  std::int64_t next_iteration_ = 0;
};

/// Client clock for the real-time transport: CLOCK_MONOTONIC plus an injected
/// offset and drift, standing in for an unsynchronised host clock.
struct LocalClock {
  Micros offset_us = 0;
  double drift_ppm = 0.0;
  Micros now() const;
  /// Converts a local reading back to the monotonic base (for sleeping).
  Micros to_base(Micros local) const;
};

/// Monotonic clock in µs (the server's timeline in real-time mode).
Micros monotonic_now();

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  std::string to_string() const { return host + ":" + std::to_string(port); }
};

struct ServerOptions {
  /// Called with the bound port once the server listens.
  std::function<void(std::uint16_t)> on_listening;
  Micros start_timeout_us = 30'000'000;
  Micros linger_us = 1'000'000;  // wait for goodbyes after the last iteration
};

/// Runs a real-time server over TCP until the session completes.
SessionSummary run_server(const ServerConfig& cfg, const RigGeometryd& rig, SessionSink& sink,
                          const Endpoint& listen, const ServerOptions& options = {});

/// Connects and runs one real-time client. Throws Errc::DuplicateClientId when
/// the server refuses the id and Errc::Connection when it cannot be reached.
ClientSummary run_client(const ClientConfig& cfg, MeasurementSource& source,
                         const LocalClock& clock, const Endpoint& server,
                         Micros connect_timeout_us = 5'000'000);

}  // namespace trilat
