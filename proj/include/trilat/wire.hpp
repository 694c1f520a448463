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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "trilat/clocksync.hpp"
#include "trilat/geometry.hpp"
#include "trilat/schedule.hpp"

namespace trilat {

using Bytes = std::vector<std::uint8_t>;

// Header: magic "TLRG" | version u8 | type u8 | payload_len u16. Multi-byte
// integers are little-endian; measurements are IEEE-754 binary64, little-endian.
inline constexpr std::array<std::uint8_t, 4> kMagic{'T', 'L', 'R', 'G'};
inline constexpr std::uint8_t kWireVersion = 1;
inline constexpr std::size_t kHeaderSize = 8;
inline constexpr std::size_t kJointCount = 6;
inline constexpr std::size_t kJointFramePayloadSize = 1 + 4 + 8 + kJointCount * 3 * 8;
static_assert(kJointFramePayloadSize == 157);

enum class MessageType : std::uint8_t { SyncReq = 0, SyncResp = 1, JointFrame = 2, SessionCtrl = 3 };

enum class Joint : std::uint8_t { LeftHip, RightHip, LeftKnee, RightKnee, LeftAnkle, RightAnkle };

inline constexpr std::array<Joint, kJointCount> kJoints{Joint::LeftHip,   Joint::RightHip,
                                                        Joint::LeftKnee,  Joint::RightKnee,
                                                        Joint::LeftAnkle, Joint::RightAnkle};

std::string_view joint_name(Joint j) noexcept;
std::optional<Joint> joint_from_name(std::string_view name) noexcept;

using JointMeasurements = std::array<RawMeasurementd, kJointCount>;

struct JointFrame {
  ClientId client_id = 1;
  std::uint32_t seq = 0;
  std::uint64_t client_ts = 0;
  JointMeasurements joints{};

  bool operator==(const JointFrame&) const = default;
};

struct SyncRequest {
  std::uint64_t t1 = 0;
  bool operator==(const SyncRequest&) const = default;
};

struct SyncResponse {
  std::uint64_t t1 = 0;
  std::uint64_t t2 = 0;
  std::uint64_t t3 = 0;
  bool operator==(const SyncResponse&) const = default;
};

/// Session handshake and lifecycle. Payload: op u8 | client_id u8 | value u64.
struct SessionControl {
  enum class Op : std::uint8_t { Hello = 0, Accept = 1, Refuse = 2, Ready = 3, Start = 4, Bye = 5 };
  Op op = Op::Hello;
  ClientId client_id = 0;
  std::uint64_t value = 0;  // Start: session epoch in server µs

  bool operator==(const SessionControl&) const = default;
};
inline constexpr std::size_t kSessionControlPayloadSize = 10;

using Message = std::variant<SyncRequest, SyncResponse, JointFrame, SessionControl>;

Bytes encode(const Message& m);
Bytes encode_frame(const JointFrame& f);

/// Decodes exactly one message occupying all of `b`. Errors, in check order:
/// Truncated, BadMagic, BadVersion, UnknownType, InvariantViolation.
Message decode(std::span<const std::uint8_t> b);
JointFrame decode_frame(std::span<const std::uint8_t> b);

/// Total size of the message at the front of a stream buffer once its header
/// is complete; nullopt while fewer than kHeaderSize bytes are buffered.
/// Validates magic, version and type so a corrupt stream fails fast.
std::optional<std::size_t> framed_length(std::span<const std::uint8_t> b);

}  // namespace trilat
