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

#include "trilat/wire.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "trilat/error.hpp"

namespace trilat {
namespace {

constexpr std::array<std::string_view, kJointCount> kJointNames{
    "left_hip", "right_hip", "left_knee", "right_knee", "left_ankle", "right_ankle"};

class Writer {
 public:
  explicit Writer(MessageType type, std::size_t payload_size) {
    out_.reserve(kHeaderSize + payload_size);
    out_.insert(out_.end(), kMagic.begin(), kMagic.end());
    u8(kWireVersion);
    u8(static_cast<std::uint8_t>(type));
    u16(static_cast<std::uint16_t>(payload_size));
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
  Bytes take() && { return std::move(out_); }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}
  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(le(8)); }

 private:
  std::uint64_t le(int n) {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= std::uint64_t{b_[pos_ + i]} << (8 * i);
    pos_ += n;
    return v;
  }
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

std::size_t payload_size_of(MessageType t) {
  switch (t) {
    case MessageType::SyncReq: return 8;
    case MessageType::SyncResp: return 24;
    case MessageType::JointFrame: return kJointFramePayloadSize;
    case MessageType::SessionCtrl: return kSessionControlPayloadSize;
  }
  return 0;
}

MessageType check_header(std::span<const std::uint8_t> b) {
  if (b.size() < kMagic.size()) throw Error(Errc::Truncated, "message shorter than magic");
  if (!std::equal(kMagic.begin(), kMagic.end(), b.begin())) {
    throw Error(Errc::BadMagic, "bad magic");
  }
  if (b.size() < kHeaderSize) throw Error(Errc::Truncated, "incomplete header");
  if (b[4] != kWireVersion) {
    throw Error(Errc::BadVersion, "wire version " + std::to_string(b[4]));
  }
  if (b[5] > static_cast<std::uint8_t>(MessageType::SessionCtrl)) {
    throw Error(Errc::UnknownType, "message type " + std::to_string(b[5]));
  }
  return static_cast<MessageType>(b[5]);
}

void check_measurement(const RawMeasurementd& m, std::size_t joint) {
  if (!is_valid(m)) {
    throw Error(Errc::InvariantViolation,
                "joint " + std::string(kJointNames[joint]) + " measurement out of range");
  }
}

}  // namespace

std::string_view joint_name(Joint j) noexcept { return kJointNames[static_cast<std::size_t>(j)]; }

std::optional<Joint> joint_from_name(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kJointCount; ++i) {
    if (kJointNames[i] == name) return kJoints[i];
  }
  return std::nullopt;
}

Bytes encode_frame(const JointFrame& f) {
  Writer w(MessageType::JointFrame, kJointFramePayloadSize);
  w.u8(f.client_id);
  w.u32(f.seq);
  w.u64(f.client_ts);
  for (const RawMeasurementd& m : f.joints) {
    w.f64(m.depth);
    w.f64(m.theta1);
    w.f64(m.theta2);
  }
  return std::move(w).take();
}

Bytes encode(const Message& m) {
  struct Visitor {
    Bytes operator()(const SyncRequest& r) const {
      Writer w(MessageType::SyncReq, 8);
      w.u64(r.t1);
      return std::move(w).take();
    }
    Bytes operator()(const SyncResponse& r) const {
      Writer w(MessageType::SyncResp, 24);
      w.u64(r.t1);
      w.u64(r.t2);
      w.u64(r.t3);
      return std::move(w).take();
    }
    Bytes operator()(const JointFrame& f) const { return encode_frame(f); }
    Bytes operator()(const SessionControl& c) const {
      Writer w(MessageType::SessionCtrl, kSessionControlPayloadSize);
      w.u8(static_cast<std::uint8_t>(c.op));
      w.u8(c.client_id);
      w.u64(c.value);
      return std::move(w).take();
    }
  };
  return std::visit(Visitor{}, m);
}

std::optional<std::size_t> framed_length(std::span<const std::uint8_t> b) {
  if (b.size() < kHeaderSize) {
    // Reject garbage as soon as the magic prefix disagrees.
    const std::size_t n = std::min(b.size(), kMagic.size());
    if (!std::equal(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(n), kMagic.begin())) {
      throw Error(Errc::BadMagic, "bad magic");
    }
    return std::nullopt;
  }
  check_header(b);
  return kHeaderSize + (std::size_t{b[6]} | (std::size_t{b[7]} << 8));
}

Message decode(std::span<const std::uint8_t> b) {
  const MessageType type = check_header(b);
  const std::size_t payload_len = std::size_t{b[6]} | (std::size_t{b[7]} << 8);
  if (b.size() < kHeaderSize + payload_len) {
    throw Error(Errc::Truncated, "payload has " + std::to_string(b.size() - kHeaderSize) +
                                     " of " + std::to_string(payload_len) + " bytes");
  }
  if (b.size() != kHeaderSize + payload_len) {
    throw Error(Errc::InvariantViolation, "trailing bytes after payload");
  }
  if (payload_len != payload_size_of(type)) {
    throw Error(Errc::InvariantViolation, "payload length " + std::to_string(payload_len) +
                                              " does not match message type");
  }

  Reader r(b.subspan(kHeaderSize));
  switch (type) {
    case MessageType::SyncReq: return SyncRequest{r.u64()};
    case MessageType::SyncResp: {
      SyncResponse s;
      s.t1 = r.u64();
      s.t2 = r.u64();
      s.t3 = r.u64();
      return s;
    }
    case MessageType::JointFrame: {
      JointFrame f;
      f.client_id = r.u8();
      f.seq = r.u32();
      f.client_ts = r.u64();
      for (std::size_t j = 0; j < kJointCount; ++j) {
        RawMeasurementd& m = f.joints[j];
        m.depth = r.f64();
        m.theta1 = r.f64();
        m.theta2 = r.f64();
        check_measurement(m, j);
      }
      if (f.client_id < 1 || f.client_id > 3) {
        throw Error(Errc::InvariantViolation, "client id " + std::to_string(f.client_id));
      }
      return f;
    }
    case MessageType::SessionCtrl: {
      SessionControl c;
      const std::uint8_t op = r.u8();
      if (op > static_cast<std::uint8_t>(SessionControl::Op::Bye)) {
        throw Error(Errc::InvariantViolation, "session op " + std::to_string(op));
      }
      c.op = static_cast<SessionControl::Op>(op);
      c.client_id = r.u8();
      c.value = r.u64();
      return c;
    }
  }
  throw Error(Errc::UnknownType, "unreachable message type");
}

JointFrame decode_frame(std::span<const std::uint8_t> b) {
  Message m = decode(b);
  if (auto* f = std::get_if<JointFrame>(&m)) return *f;
  throw Error(Errc::InvariantViolation, "message is not a joint frame");
}

}  // namespace trilat
