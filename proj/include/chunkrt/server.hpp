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

#ifndef CHUNKRT_SERVER_HPP_
#define CHUNKRT_SERVER_HPP_

#include <atomic>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "chunkrt/engine.hpp"

namespace chunkrt {

// TCP inference service. One serving pipeline per connection: a reader
// thread answers pings immediately and queues observation requests into a
// single slot (newer requests supersede queued ones); a worker thread runs
// inference and writes responses. Sessions are isolated per connection; the
// engine is shared read-only.
class InferenceServer {
 public:
  InferenceServer(InferenceEngine engine, std::string host, int port);
  ~InferenceServer();

  InferenceServer(const InferenceServer&) = delete;
  InferenceServer& operator=(const InferenceServer&) = delete;

  void start();
  void stop();
  // Blocks until stop() is called from elsewhere.
  void wait();

  int port() const { return port_; }
  const InferenceEngine& engine() const { return engine_; }

  // Artificial per-request service delay (testing aid; applied in the
  // worker before inference).
  void set_inject_delay_ms(int ms) { inject_delay_ms_ = ms; }

 private:
  void accept_loop();

  InferenceEngine engine_;
  std::string host_;
  int port_;
  int listen_fd_ = -1;
  std::atomic<bool> running_{false};
  std::atomic<int> inject_delay_ms_{0};
  std::thread acceptor_;
  struct ConnectionThreads;
  std::vector<std::shared_ptr<ConnectionThreads>> connections_;
  std::mutex connections_mu_;
};

}  // namespace chunkrt

#endif  // CHUNKRT_SERVER_HPP_
