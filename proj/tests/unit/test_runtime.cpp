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

#include <chrono>
#include <thread>

#include <doctest.h>

#include "chunkrt/client.hpp"
#include "chunkrt/datagen.hpp"
#include "chunkrt/engine.hpp"
#include "chunkrt/errors.hpp"
#include "chunkrt/server.hpp"

namespace chunkrt {
namespace {

ToyDenoiser test_model(int horizon, int njoints) {
  ToyDenoiser::Shape shape;
  shape.horizon = horizon;
  shape.action_dim = njoints * kActionDim;
  shape.obs_dim = njoints + 2;
  shape.temb_dim = 8;
  shape.hidden = 16;
  return ToyDenoiser(shape, 1234);
}

InferenceEngine test_engine(bool rtc, std::uint64_t seed = 7) {
  EngineConfig cfg;
  cfg.rtc_enabled = rtc;
  cfg.fusion_window = 4;
  cfg.sample_steps = 4;
  cfg.control_period_ns = 20'000'000;
  cfg.seed = seed;
  return InferenceEngine(test_model(16, 3), planar_two_link_chain(), cfg);
}

ObservationRequest obs_request(std::uint64_t seq, const std::vector<double>& q,
                               int executed, std::int64_t latency_ns) {
  ObservationRequest req;
  req.session = 1;
  req.sequence = seq;
  req.timestamp_ns = static_cast<std::int64_t>(seq) * 20'000'000;
  req.q = q;
  req.features = q;
  req.features.push_back(0.3);
  req.features.push_back(0.1);
  req.executed = executed;
  req.latency_ns = latency_ns;
  return req;
}

TEST_CASE("engine is deterministic per (seed, session, sequence)") {
  const InferenceEngine engine = test_engine(false);
  SessionState a, b;
  const ObservationRequest req = obs_request(1, {0.1, 0.2, 0.0}, 0, 0);
  CHECK(engine.infer(a, req).chunk == engine.infer(b, req).chunk);

  SessionState c;
  ObservationRequest other = req;
  other.sequence = 2;
  CHECK_FALSE(engine.infer(c, other).chunk == engine.infer(b, req).chunk);
}

TEST_CASE("guided responses repeat the previous chunk over the delay prefix") {
  const InferenceEngine engine = test_engine(true);
  SessionState session;
  const std::vector<double> q{0.1, 0.2, 0.0};
  const ChunkResponse first = engine.infer(session, obs_request(1, q, 0, 0));

  // 80 ms measured latency at a 20 ms period: d = 4.
  const int executed = 5;
  const ChunkResponse second =
      engine.infer(session, obs_request(2, q, executed, 80'000'000));
  for (int t = 0; t <= 4; ++t) {
    for (int c = 0; c < second.chunk.cols; ++c) {
      CHECK(second.chunk.at(t, c) == first.chunk.at(executed + t, c));
    }
  }
}

TEST_CASE("latency estimate converges to a constant injected delay") {
  const InferenceEngine engine = test_engine(true);
  SessionState session;
  const std::vector<double> q{0.0, 0.5, 0.0};
  const std::int64_t delay = 150'000'000;
  engine.infer(session, obs_request(1, q, 0, 0));
  for (std::uint64_t s = 2; s <= 21; ++s) {
    engine.infer(session, obs_request(s, q, 0, delay));
  }
  CHECK(std::abs(session.latency_ema_ns - static_cast<double>(delay)) <
        0.1 * static_cast<double>(delay));
  CHECK(engine.delay_steps(session.latency_ema_ns) == 8);  // ceil(150/20)
}

TEST_CASE("engine rejects malformed observations") {
  const InferenceEngine engine = test_engine(true);
  SessionState session;
  ObservationRequest bad = obs_request(1, {0.1, 0.2}, 0, 0);  // missing a joint
  CHECK_THROWS_AS(engine.infer(session, bad), DimensionMismatch);

  ObservationRequest bad_features = obs_request(1, {0.1, 0.2, 0.0}, 0, 0);
  bad_features.features.pop_back();
  CHECK_THROWS_AS(engine.infer(session, bad_features), DimensionMismatch);
}

TEST_CASE("server answers pings and serves chunks") {
  InferenceServer server(test_engine(true), "127.0.0.1", 0);
  server.start();
  ServerConnection conn = ServerConnection::connect("127.0.0.1", server.port());
  CHECK(conn.ping());

  conn.send(obs_request(1, {0.1, 0.2, 0.0}, 0, 0));
  const WireMessage reply = conn.recv();
  const auto* chunk = std::get_if<ChunkResponse>(&reply);
  REQUIRE(chunk != nullptr);
  CHECK(chunk->sequence == 1);
  CHECK(chunk->chunk.rows == 16);
  CHECK(chunk->reference_q == std::vector<double>{0.1, 0.2, 0.0});

  // Malformed observation produces an error message, not a hangup.
  conn.send(obs_request(2, {0.1}, 0, 0));
  const WireMessage err = conn.recv();
  CHECK(std::get_if<ErrorMessage>(&err) != nullptr);
  server.stop();
}

TEST_CASE("newer requests supersede queued ones") {
  InferenceServer server(test_engine(true), "127.0.0.1", 0);
  server.start();
  server.set_inject_delay_ms(120);
  ServerConnection conn = ServerConnection::connect("127.0.0.1", server.port());

  // All three land while the worker sleeps on the first; the middle one is
  // dropped from the single-slot queue.
  conn.send(obs_request(1, {0.1, 0.2, 0.0}, 0, 0));
  std::this_thread::sleep_for(std::chrono::milliseconds(30));
  conn.send(obs_request(2, {0.1, 0.2, 0.0}, 1, 0));
  conn.send(obs_request(3, {0.1, 0.2, 0.0}, 2, 0));

  std::vector<std::uint64_t> sequences;
  for (int i = 0; i < 2; ++i) {
    const WireMessage reply = conn.recv();
    const auto* chunk = std::get_if<ChunkResponse>(&reply);
    REQUIRE(chunk != nullptr);
    sequences.push_back(chunk->sequence);
  }
  CHECK(sequences == std::vector<std::uint64_t>{1, 3});
  server.stop();
}

TEST_CASE("sync client runs an episode against a live server") {
  InferenceServer server(test_engine(true), "127.0.0.1", 0);
  server.start();

  const KinematicChain chain = planar_two_link_chain();
  ReachTask task;
  task.start_q = {0.3, 0.5, 0.02};
  task.target = {0.25, 0.2};

  ClientConfig cfg;
  cfg.port = server.port();
  cfg.mode = RolloutMode::kSync;
  cfg.effective_steps = 8;
  cfg.control_period_ns = 2'000'000;  // 2 ms ticks keep the test quick
  cfg.success.max_ticks = 60;
  const ClientResult result = client_sync(chain, task, cfg);
  CHECK(result.metrics.ticks >= 8);
  CHECK(result.metrics.inference_calls >= 1);
  CHECK(result.episode.frames.size() == static_cast<std::size_t>(result.metrics.ticks));
  server.stop();
}

TEST_CASE("async client switches chunks and reports latency") {
  InferenceServer server(test_engine(true), "127.0.0.1", 0);
  server.start();
  server.set_inject_delay_ms(10);

  const KinematicChain chain = planar_two_link_chain();
  ReachTask task;
  task.start_q = {0.3, 0.5, 0.02};
  task.target = {0.25, 0.2};

  ClientConfig cfg;
  cfg.port = server.port();
  cfg.mode = RolloutMode::kAsync;
  cfg.control_period_ns = 5'000'000;  // 5 ms ticks
  cfg.success.max_ticks = 100;
  const ClientResult result = client_async(chain, task, cfg);
  CHECK(result.metrics.ticks >= 20);
  CHECK(result.metrics.inference_calls >= 3);
  CHECK(result.metrics.switches >= 1);
  server.stop();
}

TEST_CASE("clients surface connection failures") {
  const KinematicChain chain = planar_two_link_chain();
  ReachTask task;
  task.start_q = {0.0, 0.5, 0.0};
  task.target = {0.3, 0.1};
  ClientConfig cfg;
  cfg.port = 1;  // nothing listens there
  CHECK_THROWS_AS(client_sync(chain, task, cfg), ConnectionLost);
}

}  // namespace
}  // namespace chunkrt
