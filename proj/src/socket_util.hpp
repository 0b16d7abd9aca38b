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

// Blocking framed-socket helpers shared by the server and client; not part
// of the public surface.

#ifndef CHUNKRT_SRC_SOCKET_UTIL_HPP_
#define CHUNKRT_SRC_SOCKET_UTIL_HPP_

#include <optional>
#include <string>

#include "chunkrt/wire.hpp"

namespace chunkrt::net {

// Reads exactly n bytes; false on orderly shutdown before any byte, throws
// ConnectionLost mid-record.
bool read_exact(int fd, char* buf, std::size_t n);

void write_all(int fd, const char* data, std::size_t n);

// One whole frame payload; nullopt on clean EOF at a frame boundary.
std::optional<std::string> read_frame_payload(int fd);

void write_message(int fd, const WireMessage& msg);

// Returns a connected fd or throws ConnectionLost.
int connect_tcp(const std::string& host, int port, int timeout_ms);

void set_recv_timeout(int fd, int timeout_ms);

}  // namespace chunkrt::net

#endif  // CHUNKRT_SRC_SOCKET_UTIL_HPP_
