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

#include <algorithm>
#include <string>

#include "trilat/endpoints.hpp"
#include "trilat/error.hpp"

namespace trilat {

ServerCore::ServerCore(ServerConfig cfg, RigGeometryd rig, SessionSink& sink)
    : cfg_(std::move(cfg)), rig_(rig), sink_(sink) {
  cfg_.schedule.validate();
  std::vector<ClientId> ids = cfg_.schedule.clients;
  std::sort(ids.begin(), ids.end());
  if (ids != std::vector<ClientId>{1, 2, 3}) {
    throw Error(Errc::Config, "the server trilaterates from exactly clients 1, 2 and 3");
  }
  if (cfg_.iterations < 0) throw Error(Errc::Config, "negative iteration count");
  summary_.iterations_planned = cfg_.iterations;
}

std::vector<Outgoing> ServerCore::on_message(ConnectionId conn,
                                             std::span<const std::uint8_t> bytes,
                                             Micros received, Micros now) {
  const Message msg = decode(bytes);
  std::vector<Outgoing> out;
  if (const auto* req = std::get_if<SyncRequest>(&msg)) {
    ++summary_.sync_requests_answered;
    const SyncResponse resp{req->t1, static_cast<std::uint64_t>(received),
                            static_cast<std::uint64_t>(now)};
    out.push_back({conn, encode(resp)});
  } else if (const auto* ctl = std::get_if<SessionControl>(&msg)) {
    out = handle_control(conn, *ctl, now);
  } else if (const auto* frame = std::get_if<JointFrame>(&msg)) {
    handle_frame(conn, *frame, received);
  } else {
    throw Error(Errc::InvariantViolation, "unexpected message from a client");
  }
  return out;
}

std::vector<Outgoing> ServerCore::handle_control(ConnectionId conn, const SessionControl& c,
                                                 Micros now) {
  using Op = SessionControl::Op;
  std::vector<Outgoing> out;
  switch (c.op) {
    case Op::Hello: {
      const bool known = cfg_.schedule.position_of(c.client_id).has_value();
      if (!known || registered_.contains(c.client_id) || peers_.contains(conn)) {
        ++summary_.connections_refused;
        out.push_back({conn, encode(SessionControl{Op::Refuse, c.client_id, 0}), true});
        break;
      }
      registered_.insert(c.client_id);
      peers_[conn].id = c.client_id;
      out.push_back({conn, encode(SessionControl{Op::Accept, c.client_id, 0})});
      break;
    }
    case Op::Ready: {
      auto it = peers_.find(conn);
      if (it == peers_.end()) break;
      it->second.ready = true;
      if (summary_.epoch) {
        // Late joiner: tell it the running epoch.
        out.push_back({conn, encode(SessionControl{Op::Start, it->second.id,
                                                   static_cast<std::uint64_t>(*summary_.epoch)})});
        break;
      }
      const std::size_t ready = static_cast<std::size_t>(
          std::count_if(peers_.begin(), peers_.end(), [](const auto& p) { return p.second.ready; }));
      if (ready == cfg_.schedule.clients.size()) {
        summary_.epoch = now + cfg_.start_lead_us;
        for (const auto& [id, peer] : peers_) {
          out.push_back({id, encode(SessionControl{Op::Start, peer.id,
                                                   static_cast<std::uint64_t>(*summary_.epoch)})});
        }
      }
      break;
    }
    case Op::Bye: {
      auto it = peers_.find(conn);
      if (it != peers_.end()) it->second.said_bye = true;
      break;
    }
    case Op::Accept:
    case Op::Refuse:
    case Op::Start:
      break;
  }
  return out;
}

void ServerCore::handle_frame(ConnectionId conn, const JointFrame& f, Micros received) {
  ++summary_.frames_received;
  auto it = peers_.find(conn);
  if (it == peers_.end() || it->second.id != f.client_id || !summary_.epoch) {
    ++summary_.frames_rejected;
    return;
  }
  Peer& peer = it->second;
  if (peer.last_seq && f.seq != *peer.last_seq + 1) ++summary_.sequence_gaps;
  peer.last_seq = f.seq;
  sink_.on_arrival({f.client_id, f.seq, received});

  const Micros epoch = *summary_.epoch;
  const std::int64_t k = iteration_of(cfg_.schedule, static_cast<Micros>(f.client_ts) - epoch);
  if (k < 0 || k >= cfg_.iterations) {
    ++summary_.frames_rejected;
    return;
  }
  if (k < next_to_close_ || received >= epoch + cfg_.schedule.assembly_deadline(k)) {
    ++summary_.frames_late;
    return;
  }
  auto& slot = pending_[k];
  if (slot.contains(f.client_id)) {
    ++summary_.frames_duplicate;
    return;
  }
  if (slot_for(cfg_.schedule, received - epoch) != SlotOwner::of(f.client_id) ||
      iteration_of(cfg_.schedule, received - epoch) != k) {
    ++summary_.frames_out_of_slot;
  }
  slot.emplace(f.client_id, f);
}

std::vector<Outgoing> ServerCore::on_disconnect(ConnectionId conn, Micros /*now*/) {
  auto it = peers_.find(conn);
  if (it == peers_.end()) return {};
  const Peer peer = it->second;
  peers_.erase(it);
  const bool session_over = started() && all_iterations_closed();
  if (!peer.said_bye && !session_over) summary_.clients_lost.push_back(peer.id);
  return {};
}

std::optional<Micros> ServerCore::next_deadline() const {
  if (!summary_.epoch || all_iterations_closed()) return std::nullopt;
  return *summary_.epoch + cfg_.schedule.assembly_deadline(next_to_close_);
}

void ServerCore::advance(Micros now) {
  while (auto deadline = next_deadline()) {
    if (*deadline > now) break;
    close_iteration(next_to_close_, *deadline);
    ++next_to_close_;
  }
}

bool ServerCore::all_iterations_closed() const noexcept {
  return next_to_close_ >= cfg_.iterations;
}

std::size_t ServerCore::active_clients() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(peers_.begin(), peers_.end(), [](const auto& p) { return !p.second.said_bye; }));
}

void ServerCore::close_iteration(std::int64_t k, Micros now) {
  auto node = pending_.extract(k);
  if (node.empty() || node.mapped().size() != 3) {
    ++summary_.iterations_skipped;
    return;
  }
  const auto& frames = node.mapped();
  const JointFrame& f1 = frames.at(1);
  const JointFrame& f2 = frames.at(2);
  const JointFrame& f3 = frames.at(3);
  for (std::size_t j = 0; j < kJointCount; ++j) {
    try {
      const Point3d p = trilaterate(
          rig_, std::array<RawMeasurementd, 3>{f1.joints[j], f2.joints[j], f3.joints[j]}, cfg_.side);
      sink_.on_position({k, kJoints[j], p, now});
      ++summary_.positions_emitted;
    } catch (const Error& e) {
      if (e.code() != Errc::NoIntersection) throw;
      ++summary_.trilateration_failures;
    }
  }
  ++summary_.iterations_completed;
}

}  // namespace trilat
