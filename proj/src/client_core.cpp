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

#include <string>

#include "trilat/endpoints.hpp"
#include "trilat/error.hpp"

namespace trilat {

ClientCore::ClientCore(ClientConfig cfg, MeasurementSource& source)
    : cfg_(std::move(cfg)), source_(source) {
  cfg_.schedule.validate();
  if (!cfg_.schedule.position_of(cfg_.id)) {
    throw Error(Errc::UnknownClient, "client " + std::to_string(cfg_.id) + " has no slot");
  }
  if (cfg_.sync_enabled && cfg_.sync_burst == 0) {
    throw Error(Errc::Config, "sync burst must contain at least one exchange");
  }
}

std::vector<Bytes> ClientCore::start(Micros /*now*/) {
  state_ = State::Connecting;
  return {encode(SessionControl{SessionControl::Op::Hello, cfg_.id, 0})};
}

Bytes ClientCore::begin_burst(Micros now) {
  burst_active_ = true;
  burst_.clear();
  return encode(SyncRequest{static_cast<std::uint64_t>(now)});
}

std::vector<Bytes> ClientCore::on_message(std::span<const std::uint8_t> bytes, Micros now) {
  using Op = SessionControl::Op;
  const Message msg = decode(bytes);
  std::vector<Bytes> out;

  if (const auto* ctl = std::get_if<SessionControl>(&msg)) {
    switch (ctl->op) {
      case Op::Accept:
        if (state_ != State::Connecting) break;
        if (cfg_.sync_enabled) {
          state_ = State::Syncing;
          out.push_back(begin_burst(now));
        } else {
          state_ = State::Ready;
          out.push_back(encode(SessionControl{Op::Ready, cfg_.id, 0}));
        }
        break;
      case Op::Refuse:
        state_ = State::Refused;
        summary_.refused = true;
        break;
      case Op::Start:
        if (state_ == State::Ready) {
          epoch_ = static_cast<Micros>(ctl->value);
          state_ = cfg_.iterations > 0 ? State::Running : State::Done;
        }
        break;
      default:
        break;
    }
    return out;
  }

  if (const auto* resp = std::get_if<SyncResponse>(&msg)) {
    if (!burst_active_) return out;
    burst_.push_back({static_cast<Micros>(resp->t1), static_cast<Micros>(resp->t2),
                      static_cast<Micros>(resp->t3), now});
    if (burst_.size() < cfg_.sync_burst) {
      out.push_back(encode(SyncRequest{static_cast<std::uint64_t>(now)}));
      return out;
    }
    burst_active_ = false;
    summary_.model = refine(burst_, cfg_.sync_burst);
    ++summary_.sync_bursts;
    last_sync_ = now;
    if (state_ == State::Syncing) {
      state_ = State::Ready;
      out.push_back(encode(SessionControl{Op::Ready, cfg_.id, 0}));
    }
    return out;
  }
  throw Error(Errc::InvariantViolation, "unexpected message from the server");
}

Micros ClientCore::deadline_for(std::int64_t iteration) const {
  const Micros session_deadline = next_send_deadline(
      cfg_.schedule, cfg_.id, static_cast<Micros>(iteration) * cfg_.schedule.iteration_us());
  return to_client_time(*epoch_ + session_deadline + cfg_.acquisition_us, summary_.model);
}

std::optional<Micros> ClientCore::next_wakeup() const {
  if (state_ != State::Running) return std::nullopt;
  return deadline_for(next_iteration_);
}

std::vector<Bytes> ClientCore::on_timer(Micros now) {
  std::vector<Bytes> out;
  if (state_ != State::Running || now < deadline_for(next_iteration_)) return out;

  const std::int64_t k = next_iteration_;
  const std::optional<JointMeasurements> joints = source_.read(k);
  if (!joints) {
    summary_.source_exhausted = true;
    state_ = State::Done;
    out.push_back(encode(SessionControl{SessionControl::Op::Bye, cfg_.id, 0}));
    return out;
  }
  JointFrame f;
  f.client_id = cfg_.id;
  f.seq = ++summary_.frames_sent;
  f.client_ts = static_cast<std::uint64_t>(*epoch_ + k * cfg_.schedule.iteration_us());
  f.joints = *joints;
  out.push_back(encode_frame(f));
  ++next_iteration_;

  if (next_iteration_ >= cfg_.iterations) {
    state_ = State::Done;
    out.push_back(encode(SessionControl{SessionControl::Op::Bye, cfg_.id, 0}));
  } else if (cfg_.sync_enabled && !burst_active_ && now - last_sync_ >= cfg_.resync_interval_us) {
    out.push_back(begin_burst(now));
  }
  return out;
}

}  // namespace trilat
