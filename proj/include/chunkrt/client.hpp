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

#ifndef CHUNKRT_CLIENT_HPP_
#define CHUNKRT_CLIENT_HPP_

#include <mutex>
#include <string>

#include "chunkrt/bench.hpp"
#include "chunkrt/episode.hpp"
#include "chunkrt/plant.hpp"

namespace chunkrt {

// Blocking framed TCP connection to an inference server.
class ServerConnection {
 public:
  static ServerConnection connect(const std::string& host, int port,
                                  int timeout_ms = 10'000);
  ~ServerConnection();
  ServerConnection(ServerConnection&& o) noexcept;
  ServerConnection& operator=(ServerConnection&&) = delete;
  ServerConnection(const ServerConnection&) = delete;

  void send(const WireMessage& msg);
  // Throws Timeout / ConnectionLost.
  WireMessage recv();

  // Round-trip sanity check.
  bool ping();

  // Unblocks any pending recv; subsequent calls fail with ConnectionLost.
  void shutdown();

 private:
  explicit ServerConnection(int fd) : fd_(fd) {}
  int fd_ = -1;
  std::mutex write_mu_;
};

struct ClientConfig {
  std::string host = "127.0.0.1";
  int port = 0;
  RolloutMode mode = RolloutMode::kAsync;
  // Sync mode executes this many steps of each chunk (0 = all).
  int effective_steps = 0;
  // Artificial network delay added around each exchange.
  int delay_inject_ms = 0;
  int timeout_ms = 10'000;
  SuccessSpec success;
  double plant_vmax = 5.0;
  std::int64_t control_period_ns = 20'000'000;
  std::uint64_t session = 1;
};

struct ClientResult {
  RolloutMetrics metrics;
  Episode episode;
};

// Drives the simulated plant against a live server at the wall-clock control
// rate. Strict observe-infer-execute timing; the plant holds while waiting.
ClientResult client_sync(const KinematicChain& chain, const ReachTask& task,
                         const ClientConfig& cfg);

// Execution ticks continuously; a fresh observation goes out as soon as the
// previous response arrives, and the executor switches to the new chunk at
// the row aligned with wall-clock progress. Reports measured latency to the
// server with every request.
ClientResult client_async(const KinematicChain& chain, const ReachTask& task,
                          const ClientConfig& cfg);

}  // namespace chunkrt

#endif  // CHUNKRT_CLIENT_HPP_
