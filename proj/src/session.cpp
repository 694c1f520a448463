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

#include <cmath>
#include <exception>
#include <future>
#include <queue>
#include <thread>

#include "trilat/error.hpp"
#include "trilat/simulator.hpp"

namespace trilat {
namespace {

// True time at which the virtual session starts; keeps every clock positive.
constexpr Micros kVirtualStart = 1'000'000;

class DelaySampler {
 public:
  DelaySampler(const NetworkDelay& d, Rng rng) : d_(d), rng_(std::move(rng)) {}
  Micros sample() {
    double ms = d_.base_ms;
    if (d_.jitter_ms > 0) {
      ms += std::lognormal_distribution<double>(std::log(d_.jitter_ms), d_.shape)(rng_);
    }
    return std::max<Micros>(0, std::llround(ms * 1000.0));
  }

 private:
  NetworkDelay d_;
  Rng rng_;
};

struct VirtualClock {
  Micros offset_us = 0;
  double drift_ppm = 0.0;

  Micros local(Micros t) const {
    return t + offset_us + std::llround(static_cast<double>(t) * drift_ppm * 1e-6);
  }
  /// Smallest true time whose local reading is at least `reading`.
  Micros true_time_for(Micros reading) const {
    Micros t = static_cast<Micros>(
        std::floor(static_cast<double>(reading - offset_us) / (1.0 + drift_ppm * 1e-6)));
    while (local(t) < reading) ++t;
    while (local(t - 1) >= reading) --t;
    return t;
  }
};

class VirtualRun {
 public:
  VirtualRun(const Scene& scene, const NoiseModel& noise, const SessionSettings& settings,
             std::array<SimulatedSensorSource*, 3> sources, SessionSink& sink)
      : settings_(settings),
        server_(ServerConfig{settings.schedule, settings.iterations(), scene.side}, scene.rig, sink) {
    for (int c = 0; c < 3; ++c) {
      clients_[c].core.emplace(client_config(settings, static_cast<ClientId>(c + 1)), *sources[c]);
      clients_[c].clock = {noise.clock_offset_us[c], noise.clock_drift_ppm[c]};
      up_.emplace_back(noise.net, make_rng(noise.seed, 200 + c));
      down_.emplace_back(noise.net, make_rng(noise.seed, 300 + c));
    }
  }

  void run() {
    for (int c = 0; c < 3; ++c) {
      Client& cl = clients_[c];
      send_up(c, cl.core->start(cl.clock.local(kVirtualStart)), kVirtualStart);
      after_client(c, kVirtualStart);
    }
    while (!queue_.empty()) {
      Event ev = queue_.top();
      queue_.pop();
      dispatch(ev);
    }
  }

  const SessionSummary& summary() const { return server_.summary(); }
  ClientSummary client_summary(int c) const { return clients_[c].core->summary(); }

 private:
  enum class Kind { ToServer, ServerDisconnect, ToClient, ClientTimer, ServerDeadline };
  struct Event {
    Micros time;
    std::uint64_t order;
    Kind kind;
    int client;
    Bytes bytes;
    bool close_after;
    std::uint64_t generation;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.order > b.order;
    }
  };
  struct Client {
    std::optional<ClientCore> core;
    VirtualClock clock;
    bool closed = false;
    std::uint64_t timer_generation = 0;
    Micros last_up = 0;
    Micros last_down = 0;
  };

  void push(Micros t, Kind kind, int client, Bytes bytes = {}, bool close_after = false,
            std::uint64_t generation = 0) {
    queue_.push({t, next_order_++, kind, client, std::move(bytes), close_after, generation});
  }

  void send_up(int c, std::vector<Bytes> out, Micros now) {
    Client& cl = clients_[c];
    for (Bytes& b : out) {
      cl.last_up = std::max(now + up_[c].sample(), cl.last_up);
      push(cl.last_up, Kind::ToServer, c, std::move(b));
    }
  }

  void route(std::vector<Outgoing> out, Micros now) {
    for (Outgoing& o : out) {
      const int c = static_cast<int>(o.conn) - 1;
      Client& cl = clients_[c];
      cl.last_down = std::max(now + down_[c].sample(), cl.last_down);
      push(cl.last_down, Kind::ToClient, c, std::move(o.bytes), o.close_after);
    }
  }

  void close_client(int c) {
    Client& cl = clients_[c];
    cl.closed = true;
    ++cl.timer_generation;
    push(cl.last_up, Kind::ServerDisconnect, c);
  }

  void after_client(int c, Micros now) {
    Client& cl = clients_[c];
    if (cl.closed) return;
    const auto limit = settings_.disconnect_after_frames[c];
    if (cl.core->finished() || (limit && cl.core->summary().frames_sent >= *limit)) {
      close_client(c);
      return;
    }
    ++cl.timer_generation;
    if (auto wake = cl.core->next_wakeup()) {
      push(std::max(now, cl.clock.true_time_for(*wake)), Kind::ClientTimer, c, {}, false,
           cl.timer_generation);
    }
  }

  void after_server() {
    const auto deadline = server_.next_deadline();
    if (deadline == scheduled_deadline_) return;
    scheduled_deadline_ = deadline;
    ++deadline_generation_;
    if (deadline) push(*deadline, Kind::ServerDeadline, 0, {}, false, deadline_generation_);
  }

  void dispatch(Event& ev) {
    Client& cl = clients_[ev.client];
    switch (ev.kind) {
      case Kind::ToServer:
        route(server_.on_message(static_cast<ConnectionId>(ev.client + 1), ev.bytes, ev.time,
                                 ev.time),
              ev.time);
        after_server();
        break;
      case Kind::ServerDisconnect:
        server_.on_disconnect(static_cast<ConnectionId>(ev.client + 1), ev.time);
        after_server();
        break;
      case Kind::ServerDeadline:
        if (ev.generation != deadline_generation_) break;
        scheduled_deadline_.reset();
        server_.advance(ev.time);
        after_server();
        break;
      case Kind::ToClient:
        if (cl.closed) break;
        send_up(ev.client, cl.core->on_message(ev.bytes, cl.clock.local(ev.time)), ev.time);
        after_client(ev.client, ev.time);
        break;
      case Kind::ClientTimer:
        if (cl.closed || ev.generation != cl.timer_generation) break;
        send_up(ev.client, cl.core->on_timer(cl.clock.local(ev.time)), ev.time);
        after_client(ev.client, ev.time);
        break;
    }
  }

  SessionSettings settings_;
  ServerCore server_;
  std::array<Client, 3> clients_;
  std::vector<DelaySampler> up_;
  std::vector<DelaySampler> down_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t next_order_ = 0;
  std::optional<Micros> scheduled_deadline_;
  std::uint64_t deadline_generation_ = 0;
};

void run_real_time(const Scene& scene, const NoiseModel& noise, const SessionSettings& settings,
                   std::array<SimulatedSensorSource*, 3> sources, SessionSink& sink,
                   SessionArtifacts& out) {
  std::promise<std::uint16_t> port_promise;
  auto port_future = port_promise.get_future();
  ServerOptions options;
  options.on_listening = [&port_promise](std::uint16_t port) { port_promise.set_value(port); };

  std::exception_ptr server_error;
  std::thread server([&] {
    try {
      out.summary = run_server(ServerConfig{settings.schedule, settings.iterations(), scene.side},
                               scene.rig, sink, Endpoint{"127.0.0.1", 0}, options);
    } catch (...) {
      server_error = std::current_exception();
      try {
        port_promise.set_value(0);
      } catch (...) {
      }
    }
  });

  const std::uint16_t port = port_future.get();
  std::array<std::exception_ptr, 3> client_errors;
  std::vector<std::thread> clients;
  if (port != 0) {
    for (int c = 0; c < 3; ++c) {
      clients.emplace_back([&, c] {
        const ClientConfig cc = client_config(settings, static_cast<ClientId>(c + 1));
        try {
          out.clients[c] = run_client(cc, *sources[c],
                                      LocalClock{noise.clock_offset_us[c], noise.clock_drift_ppm[c]},
                                      Endpoint{"127.0.0.1", port});
        } catch (...) {
          client_errors[c] = std::current_exception();
        }
      });
    }
  }
  for (std::thread& t : clients) t.join();
  server.join();
  if (server_error) std::rethrow_exception(server_error);
  for (const auto& e : client_errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::int64_t SessionSettings::iterations() const {
  if (!(duration_s >= 0) || !std::isfinite(duration_s)) {
    throw Error(Errc::Config, "session duration must be a non-negative number of seconds");
  }
  return std::llround(duration_s * 1e6) / schedule.iteration_us();
}

ClientConfig client_config(const SessionSettings& settings, ClientId id) {
  ClientConfig cc;
  cc.id = id;
  cc.schedule = settings.schedule;
  cc.iterations = settings.iterations();
  cc.sync_enabled = settings.sync.enabled;
  cc.sync_burst = settings.sync.burst;
  cc.resync_interval_us = settings.sync.interval_us;
  cc.acquisition_us = settings.acquisition_us;
  return cc;
}

std::vector<GroundTruthSample> ground_truth_for(const Scene& scene, Micros iteration_us,
                                                std::int64_t iterations) {
  std::vector<GroundTruthSample> out;
  out.reserve(static_cast<std::size_t>(iterations) * kJointCount);
  for (std::int64_t k = 0; k < iterations; ++k) {
    const double t_s = static_cast<double>(k * iteration_us) * 1e-6;
    for (Joint j : kJoints) out.push_back({k, j, world_position(scene, j, t_s)});
  }
  return out;
}

SessionArtifacts run_session(const Scene& scene, const NoiseModel& noise,
                             const SessionSettings& settings) {
  scene.gait.validate();
  settings.schedule.validate();
  const std::int64_t iterations = settings.iterations();
  const Micros iteration_us = settings.schedule.iteration_us();

  SessionArtifacts out;
  out.ground_truth = ground_truth_for(scene, iteration_us, iterations);

  SimulatedSensorSource s1(scene, Sensor::K1, noise, iteration_us, iterations);
  SimulatedSensorSource s2(scene, Sensor::K2, noise, iteration_us, iterations);
  SimulatedSensorSource s3(scene, Sensor::K3, noise, iteration_us, iterations);
  const std::array<SimulatedSensorSource*, 3> sources{&s1, &s2, &s3};

  MemorySink sink;
  if (settings.virtual_time) {
    VirtualRun run(scene, noise, settings, sources, sink);
    run.run();
    out.summary = run.summary();
    for (int c = 0; c < 3; ++c) out.clients[c] = run.client_summary(c);
  } else {
    run_real_time(scene, noise, settings, sources, sink, out);
  }

  for (int c = 0; c < 3; ++c) out.raw[c] = sources[c]->records();
  out.trilaterated = std::move(sink.positions);
  out.events = std::move(sink.arrivals);
  return out;
}

}  // namespace trilat
