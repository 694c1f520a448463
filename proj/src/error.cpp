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

#include "trilat/error.hpp"

namespace trilat {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::DegenerateTriangle: return "DegenerateTriangle";
    case Errc::NoIntersection: return "NoIntersection";
    case Errc::BehindSensor: return "BehindSensor";
    case Errc::OutOfView: return "OutOfView";
    case Errc::NegativeDelay: return "NegativeDelay";
    case Errc::Empty: return "Empty";
    case Errc::UnknownClient: return "UnknownClient";
    case Errc::BadMagic: return "BadMagic";
    case Errc::BadVersion: return "BadVersion";
    case Errc::UnknownType: return "UnknownType";
    case Errc::Truncated: return "Truncated";
    case Errc::InvariantViolation: return "InvariantViolation";
    case Errc::DuplicateClientId: return "DuplicateClientId";
    case Errc::ClientLost: return "ClientLost";
    case Errc::SourceExhausted: return "SourceExhausted";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::MissingArtifact: return "MissingArtifact";
    case Errc::Config: return "ConfigError";
    case Errc::Io: return "IoError";
    case Errc::Connection: return "ConnectionError";
  }
  return "Unknown";
}

}  // namespace trilat
