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

#include "chunkrt/client.hpp"

#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <optional>
#include <thread>

#include "chunkrt/errors.hpp"
#include "socket_util.hpp"

namespace chunkrt {

namespace {

using Clock = std::chrono::steady_clock;

struct TickRecorder {
  const KinematicChain& chain;
  const ReachTask& task;
  SuccessSpec success;
  double period_s;

  std::vector<std::vector<double>> history;
  int hold = 0;
  bool succeeded = false;
  int completion_ticks = 0;
  double last_distance = 0.0;
  double max_disc = 0.0;
  double disc_sum = 0.0;
  int switches = 0;

  void record(const PlantState& plant) {
    history.push_back(plant.q);
    const std::vector<Pose> poses = forward_kinematics(chain, plant.q);
    const double dx = poses.back().position.x - task.target[0];
    const double dy = poses.back().position.y - task.target[1];
    last_distance = std::sqrt(dx * dx + dy * dy);
    if (last_distance <= success.tolerance_m) {
      if (++hold >= success.hold_ticks && !succeeded) {
        succeeded = true;
        completion_ticks = static_cast<int>(history.size());
      }
    } else {
      hold = 0;
    }
  }

  void record_switch(std::span<const double> a, std::span<const double> b) {
    double disc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      disc = std::max(disc, std::abs(a[i] - b[i]));
    }
    max_disc = std::max(max_disc, disc);
    disc_sum += disc;
    ++switches;
  }

  RolloutMetrics finish(int starvation, int calls) const {
    RolloutMetrics m;
    m.success = succeeded;
    m.ticks = static_cast<int>(history.size());
    m.completion_s =
        (succeeded ? completion_ticks : static_cast<int>(history.size())) * period_s;
    m.final_distance_m = last_distance;
    m.max_switch_discontinuity = max_disc;
    m.mean_switch_discontinuity = switches ? disc_sum / switches : 0.0;
    m.switches = switches;
    m.starvation_count = starvation;
    m.inference_calls = calls;
    double jerk_sum = 0.0;
    std::size_t n = 0;
    const double p3 = period_s * period_s * period_s;
    for (std::size_t t = 3; t < history.size(); ++t) {
      for (std::size_t i = 0; i < history[t].size(); ++i) {
        jerk_sum += std::abs(history[t][i] - 3 * history[t - 1][i] +
                             3 * history[t - 2][i] - history[t - 3][i]) /
                    p3;
        ++n;
      }
    }
    m.mean_abs_jerk = n ? jerk_sum / n : 0.0;
    return m;
  }
};

std::vector<double> chunk_command(const KinematicChain& chain, const Matrix& chunk,
                                  std::span<const double> ref_q, int row) {
  std::vector<double> cmd(ref_q.begin(), ref_q.end());
  for (std::size_t i = 0; i < chain.njoints(); ++i) {
    if (chain.joints[i].kind == JointKind::kFixed) continue;
    cmd[i] = ref_q[i] + chunk.at(row, static_cast<int>(i) * kActionDim);
  }
  return cmd;
}

Episode history_episode(const KinematicChain& chain,
                        const std::vector<std::vector<double>>& history,
                        std::int64_t period_ns, const std::string& desc) {
  Episode ep;
  ep.header.embodiment = chain.name;
  ep.header.njoints = static_cast<int>(chain.njoints());
  ep.header.chain_hash = chain_hash(chain);
  ep.header.control_period_ns = period_ns;
  ep.header.task = desc;
  for (std::size_t t = 0; t < history.size(); ++t) {
    Frame f;
    f.timestamp_ns = static_cast<std::int64_t>(t) * period_ns;
    f.q = history[t];
    ep.frames.push_back(std::move(f));
  }
  return ep;
}

ObservationRequest build_request(std::uint64_t session, std::uint64_t seq,
                                 std::int64_t ts, const std::vector<double>& q,
                                 const ReachTask& task, int executed,
                                 std::int64_t latency_ns) {
  ObservationRequest req;
  req.session = session;
  req.sequence = seq;
  req.timestamp_ns = ts;
  req.q = q;
  req.features = q;
  req.features.push_back(task.target[0]);
  req.features.push_back(task.target[1]);
  req.executed = executed;
  req.latency_ns = latency_ns;
  return req;
}

ChunkResponse expect_chunk(const WireMessage& msg) {
  if (const auto* err = std::get_if<ErrorMessage>(&msg)) {
    throw Error("server error " + std::to_string(err->code) + ": " + err->text);
  }
  const auto* chunk = std::get_if<ChunkResponse>(&msg);
  if (!chunk) throw UnknownTag("expected a chunk response");
  return *chunk;
}

}  // namespace

ServerConnection ServerConnection::connect(const std::string& host, int port,
                                           int timeout_ms) {
  return ServerConnection(net::connect_tcp(host, port, timeout_ms));
}

ServerConnection::~ServerConnection() {
  if (fd_ >= 0) ::close(fd_);
}

ServerConnection::ServerConnection(ServerConnection&& o) noexcept : fd_(o.fd_) {
  o.fd_ = -1;
}

void ServerConnection::send(const WireMessage& msg) {
  std::lock_guard<std::mutex> lock(write_mu_);
  net::write_message(fd_, msg);
}

WireMessage ServerConnection::recv() {
  const auto payload = net::read_frame_payload(fd_);
  if (!payload) throw ConnectionLost("server closed the connection");
  return decode_payload(*payload);
}

bool ServerConnection::ping() {
  send(Control{ControlKind::kPing});
  const WireMessage reply = recv();
  const auto* ctl = std::get_if<Control>(&reply);
  return ctl != nullptr && ctl->kind == ControlKind::kPong;
}

void ServerConnection::shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

ClientResult client_sync(const KinematicChain& chain, const ReachTask& task,
                         const ClientConfig& cfg) {
  ServerConnection conn = ServerConnection::connect(cfg.host, cfg.port, cfg.timeout_ms);
  const double period_s = static_cast<double>(cfg.control_period_ns) * 1e-9;
  const auto period = std::chrono::nanoseconds(cfg.control_period_ns);

  PlantConfig plant_cfg;
  plant_cfg.vmax.assign(chain.njoints(), cfg.plant_vmax);
  plant_cfg.period_s = period_s;
  PlantState plant = make_plant_state(task.start_q);

  TickRecorder rec{chain, task, cfg.success, period_s};
  std::uint64_t seq = 0;
  std::int64_t measured_latency = 0;
  int calls = 0;
  std::vector<double> last_cmd = plant.q;
  bool have_last = false;

  auto next_tick = Clock::now();
  int tick = 0;
  int last_consumed = 0;
  while (tick < cfg.success.max_ticks && !rec.succeeded) {
    const auto sent_at = Clock::now();
    conn.send(build_request(cfg.session, ++seq, tick * cfg.control_period_ns,
                            plant.q, task, last_consumed, measured_latency));
    const ChunkResponse resp = expect_chunk(conn.recv());
    ++calls;
    if (cfg.delay_inject_ms > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(cfg.delay_inject_ms));
    }
    measured_latency =
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - sent_at)
            .count();

    // The motion paused while inference ran; account those ticks.
    int waited =
        static_cast<int>(measured_latency / cfg.control_period_ns);
    for (int w = 0; w < waited && tick < cfg.success.max_ticks; ++w) {
      step_plant(plant, plant.q, plant_cfg);
      rec.record(plant);
      ++tick;
      next_tick += period;
    }

    const int effective = cfg.effective_steps > 0
                              ? std::min(cfg.effective_steps, resp.chunk.rows)
                              : resp.chunk.rows;
    last_consumed = effective;
    for (int row = 0; row < effective && tick < cfg.success.max_ticks; ++row) {
      const std::vector<double> cmd =
          chunk_command(chain, resp.chunk, resp.reference_q, row);
      if (row == 0 && have_last) rec.record_switch(cmd, last_cmd);
      step_plant(plant, cmd, plant_cfg);
      rec.record(plant);
      last_cmd = cmd;
      have_last = true;
      ++tick;
      next_tick += period;
      std::this_thread::sleep_until(next_tick);
      if (rec.succeeded) break;
    }
  }

  ClientResult out;
  out.metrics = rec.finish(0, calls);
  out.episode = history_episode(chain, rec.history, cfg.control_period_ns,
                                "client sync reach2d");
  return out;
}

ClientResult client_async(const KinematicChain& chain, const ReachTask& task,
                          const ClientConfig& cfg) {
  ServerConnection conn = ServerConnection::connect(cfg.host, cfg.port, cfg.timeout_ms);
  const double period_s = static_cast<double>(cfg.control_period_ns) * 1e-9;
  const auto period = std::chrono::nanoseconds(cfg.control_period_ns);

  PlantConfig plant_cfg;
  plant_cfg.vmax.assign(chain.njoints(), cfg.plant_vmax);
  plant_cfg.period_s = period_s;

  struct Shared {
    std::mutex mu;
    PlantState plant;
    int tick = 0;
    std::optional<Matrix> chunk;
    std::vector<double> ref_q;
    int base_tick = 0;
    struct Delivery {
      ChunkResponse resp;
      int sent_tick = 0;
    };
    std::optional<Delivery> delivery;
    std::atomic<bool> stop{false};
    int calls = 0;
  } shared;
  shared.plant = make_plant_state(task.start_q);

  TickRecorder rec{chain, task, cfg.success, period_s};

  std::thread network([&] {
    std::uint64_t seq = 0;
    std::int64_t measured_latency = 0;
    try {
      while (!shared.stop.load()) {
        ObservationRequest req;
        int sent_tick;
        {
          std::lock_guard<std::mutex> lock(shared.mu);
          sent_tick = shared.tick;
          const int executed =
              shared.chunk
                  ? std::clamp(shared.tick - shared.base_tick, 0, shared.chunk->rows)
                  : 0;
          req = build_request(cfg.session, ++seq,
                              static_cast<std::int64_t>(shared.tick) *
                                  cfg.control_period_ns,
                              shared.plant.q, task, executed, measured_latency);
        }
        const auto sent_at = Clock::now();
        conn.send(req);
        const ChunkResponse resp = expect_chunk(conn.recv());
        if (cfg.delay_inject_ms > 0) {
          std::this_thread::sleep_for(std::chrono::milliseconds(cfg.delay_inject_ms));
        }
        measured_latency = std::chrono::duration_cast<std::chrono::nanoseconds>(
                               Clock::now() - sent_at)
                               .count();
        std::lock_guard<std::mutex> lock(shared.mu);
        shared.delivery = Shared::Delivery{resp, sent_tick};
        ++shared.calls;
      }
    } catch (const Error&) {
      // Connection wound down (or the rollout finished); the ticker decides.
    }
  });

  int starvation = 0;
  std::vector<double> hold_cmd = task.start_q;
  auto next_tick = Clock::now() + period;
  for (int tick = 0; tick < cfg.success.max_ticks && !rec.succeeded; ++tick) {
    std::vector<double> cmd;
    {
      std::lock_guard<std::mutex> lock(shared.mu);
      shared.tick = tick;
      if (shared.delivery) {
        const int row = tick - shared.delivery->sent_tick;
        if (row >= shared.delivery->resp.chunk.rows) {
          ++starvation;  // arrived after its whole window passed
        } else if (row >= 0) {
          const std::vector<double> new_cmd = chunk_command(
              chain, shared.delivery->resp.chunk, shared.delivery->resp.reference_q,
              row);
          if (shared.chunk) {
            const int old_row =
                std::min(tick - shared.base_tick, shared.chunk->rows - 1);
            rec.record_switch(new_cmd,
                              chunk_command(chain, *shared.chunk, shared.ref_q, old_row));
          }
          shared.chunk = std::move(shared.delivery->resp.chunk);
          shared.ref_q = std::move(shared.delivery->resp.reference_q);
          shared.base_tick = shared.delivery->sent_tick;
        }
        shared.delivery.reset();
      }
      if (shared.chunk) {
        const int row = tick - shared.base_tick;
        if (row >= shared.chunk->rows) {
          ++starvation;
          cmd = hold_cmd;
        } else {
          cmd = chunk_command(chain, *shared.chunk, shared.ref_q, row);
          hold_cmd = cmd;
        }
      } else {
        cmd = hold_cmd;
      }
      step_plant(shared.plant, cmd, plant_cfg);
      rec.record(shared.plant);
    }
    std::this_thread::sleep_until(next_tick);
    next_tick += period;
  }

  shared.stop = true;
  conn.shutdown();
  network.join();

  ClientResult out;
  out.metrics = rec.finish(starvation, shared.calls);
  out.episode = history_episode(chain, rec.history, cfg.control_period_ns,
                                "client async reach2d");
  return out;
}

}  // namespace chunkrt
