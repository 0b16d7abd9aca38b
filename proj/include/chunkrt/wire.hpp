// Copyright 2026 The chunkrt Authors
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

#ifndef CHUNKRT_WIRE_HPP_
#define CHUNKRT_WIRE_HPP_

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "chunkrt/matrix.hpp"

namespace chunkrt {

// Frames on the wire are a 4-byte big-endian payload length followed by a
// UTF-8 JSON payload. Payloads above 16 MiB are rejected.
inline constexpr std::size_t kMaxFrameBytes = 16u * 1024 * 1024;

struct ObservationRequest {
  std::uint64_t session = 0;
  std::uint64_t sequence = 0;
  std::int64_t timestamp_ns = 0;
  std::vector<double> q;
  std::vector<double> features;
  // Steps of the previous chunk consumed when this observation was taken.
  int executed = 0;
  // Client-measured round trip of the previous exchange; 0 when unknown.
  std::int64_t latency_ns = 0;

  bool operator==(const ObservationRequest&) const = default;
};

struct ChunkResponse {
  std::uint64_t session = 0;
  std::uint64_t sequence = 0;  // echoes the request
  Matrix chunk;
  std::vector<double> reference_q;
  std::int64_t generated_ns = 0;

  bool operator==(const ChunkResponse&) const = default;
};

enum class ControlKind { kStart, kPause, kStop, kPing, kPong };

struct Control {
  ControlKind kind = ControlKind::kPing;
  bool operator==(const Control&) const = default;
};

struct ErrorMessage {
  int code = 0;
  std::string text;
  bool operator==(const ErrorMessage&) const = default;
};

using WireMessage = std::variant<ObservationRequest, ChunkResponse, Control, ErrorMessage>;

// Length-prefixed frame bytes for one message.
std::string encode_message(const WireMessage& msg);

// Inverse of encode_message over a whole frame (prefix included).
WireMessage decode_message(const std::string& frame);

// Payload-only helpers for streaming I/O.
std::string encode_payload(const WireMessage& msg);
WireMessage decode_payload(const std::string& payload);

}  // namespace chunkrt

#endif  // CHUNKRT_WIRE_HPP_
