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

#include "chunkrt/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "chunkrt/datagen.hpp"
#include "chunkrt/errors.hpp"

namespace chunkrt {

namespace {

// Executed-trajectory statistics shared by both rollout modes.
class RolloutRecorder {
 public:
  RolloutRecorder(const KinematicChain& chain, const ReachTask& task,
                  const SuccessSpec& success, double period_s)
      : chain_(chain), task_(task), success_(success), period_s_(period_s) {}

  void record_tick(const PlantState& plant) {
    q_history_.push_back(plant.q);
    const std::vector<Pose> poses = forward_kinematics(chain_, plant.q);
    const Vec3& tip = poses.back().position;
    const double dx = tip.x - task_.target[0];
    const double dy = tip.y - task_.target[1];
    last_distance_ = std::sqrt(dx * dx + dy * dy);
    if (last_distance_ <= success_.tolerance_m) {
      ++hold_;
      if (hold_ >= success_.hold_ticks && !succeeded_) {
        succeeded_ = true;
        completion_ticks_ = static_cast<int>(q_history_.size());
      }
    } else {
      hold_ = 0;
    }
  }

  void record_switch(std::span<const double> new_cmd, std::span<const double> old_cmd) {
    double disc = 0.0;
    for (std::size_t i = 0; i < new_cmd.size(); ++i) {
      disc = std::max(disc, std::abs(new_cmd[i] - old_cmd[i]));
    }
    max_disc_ = std::max(max_disc_, disc);
    disc_sum_ += disc;
    ++switches_;
  }

  bool done() const { return succeeded_; }

  RolloutMetrics finish(int starvation, int inference_calls) const {
    RolloutMetrics m;
    m.success = succeeded_;
    m.ticks = static_cast<int>(q_history_.size());
    m.completion_s = succeeded_ ? completion_ticks_ * period_s_
                                : q_history_.size() * period_s_;
    m.max_switch_discontinuity = max_disc_;
    m.mean_switch_discontinuity = switches_ ? disc_sum_ / switches_ : 0.0;
    m.switches = switches_;
    m.starvation_count = starvation;
    m.final_distance_m = last_distance_;
    m.inference_calls = inference_calls;

    // Mean |third difference| of executed joints over period^3.
    double jerk_sum = 0.0;
    std::size_t jerk_count = 0;
    const double p3 = period_s_ * period_s_ * period_s_;
    for (std::size_t t = 3; t < q_history_.size(); ++t) {
      for (std::size_t i = 0; i < q_history_[t].size(); ++i) {
        const double j3 = q_history_[t][i] - 3.0 * q_history_[t - 1][i] +
                          3.0 * q_history_[t - 2][i] - q_history_[t - 3][i];
        jerk_sum += std::abs(j3) / p3;
        ++jerk_count;
      }
    }
    m.mean_abs_jerk = jerk_count ? jerk_sum / jerk_count : 0.0;
    return m;
  }

  const std::vector<std::vector<double>>& history() const { return q_history_; }

 private:
  const KinematicChain& chain_;
  const ReachTask& task_;
  SuccessSpec success_;
  double period_s_;
  std::vector<std::vector<double>> q_history_;
  int hold_ = 0;
  bool succeeded_ = false;
  int completion_ticks_ = 0;
  double max_disc_ = 0.0;
  double disc_sum_ = 0.0;
  int switches_ = 0;
  double last_distance_ = 0.0;
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

Episode history_to_episode(const KinematicChain& chain,
                           const std::vector<std::vector<double>>& history,
                           std::int64_t period_ns, const std::string& task_desc) {
  Episode ep;
  ep.header.embodiment = chain.name;
  ep.header.njoints = static_cast<int>(chain.njoints());
  ep.header.chain_hash = chain_hash(chain);
  ep.header.control_period_ns = period_ns;
  ep.header.task = task_desc;
  for (std::size_t t = 0; t < history.size(); ++t) {
    Frame frame;
    frame.timestamp_ns = static_cast<std::int64_t>(t) * period_ns;
    frame.q = history[t];
    ep.frames.push_back(std::move(frame));
  }
  return ep;
}

ObservationRequest make_request(const InferenceEngine& engine, std::uint64_t session,
                                std::uint64_t seq, std::int64_t now_ns,
                                const PlantState& plant, const ReachTask& task,
                                int executed, std::int64_t latency_ns) {
  ObservationRequest req;
  req.session = session;
  req.sequence = seq;
  req.timestamp_ns = now_ns;
  req.q = plant.q;
  req.features = plant.q;
  req.features.push_back(task.target[0]);
  req.features.push_back(task.target[1]);
  req.executed = executed;
  req.latency_ns = latency_ns;
  (void)engine;
  return req;
}

}  // namespace

ReachTask sample_reach_task(const KinematicChain& chain, std::uint64_t seed) {
  (void)chain;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  ReachTask task;
  task.start_q = {unif(rng) * 3.0 - 1.5, 0.2 + unif(rng) * 2.6, 0.02};
  // Same annulus as the expert data generator for the default fixture.
  const double reach_lo = 0.12;
  const double reach_hi = 0.48;
  for (int attempt = 0; attempt < 100; ++attempt) {
    const double radius = reach_lo + unif(rng) * (reach_hi - reach_lo);
    const double angle = unif(rng) * 2.0 * M_PI - M_PI;
    task.target = {radius * std::cos(angle), radius * std::sin(angle)};
    if (two_link_ik(0.3, 0.2, task.target[0], task.target[1], true)) return task;
  }
  throw UnreachableTarget("no reachable benchmark target found");
}

RolloutResult run_rollout(const InferenceEngine& engine, const ReachTask& task,
                          const RolloutConfig& cfg) {
  const KinematicChain& chain = engine.chain();
  const std::int64_t period_ns = engine.config().control_period_ns;
  const double period_s = static_cast<double>(period_ns) * 1e-9;
  const int horizon = engine.horizon();
  const int latency_ticks = static_cast<int>(
      (cfg.inject_latency_ns + period_ns - 1) / period_ns);

  PlantConfig plant_cfg;
  plant_cfg.vmax.assign(chain.njoints(), cfg.plant_vmax);
  plant_cfg.period_s = period_s;
  PlantState plant = make_plant_state(task.start_q);

  RolloutRecorder recorder(chain, task, cfg.success, period_s);
  SessionState session;
  int starvation = 0;
  int inference_calls = 0;
  std::uint64_t seq = 0;

  if (cfg.mode == RolloutMode::kSync) {
    // Strict observe-infer-execute cycles: the plant holds during inference.
    int tick = 0;
    const int effective =
        cfg.sync_effective_steps > 0 ? std::min(cfg.sync_effective_steps, horizon)
                                     : horizon;
    std::vector<double> last_cmd = plant.q;
    bool have_last_cmd = false;
    while (tick < cfg.success.max_ticks && !recorder.done()) {
      const std::int64_t reported = seq > 0 ? cfg.inject_latency_ns : 0;
      ++seq;
      const ObservationRequest req = make_request(
          engine, cfg.session, seq, tick * period_ns, plant, task, horizon, reported);
      const ChunkResponse resp = engine.infer(session, req);
      ++inference_calls;
      for (int w = 0; w < latency_ticks && tick < cfg.success.max_ticks; ++w) {
        step_plant(plant, plant.q, plant_cfg);  // hold
        recorder.record_tick(plant);
        ++tick;
      }
      for (int row = 0; row < effective && tick < cfg.success.max_ticks; ++row) {
        const std::vector<double> cmd =
            chunk_command(chain, resp.chunk, resp.reference_q, row);
        if (row == 0 && have_last_cmd) recorder.record_switch(cmd, last_cmd);
        step_plant(plant, cmd, plant_cfg);
        recorder.record_tick(plant);
        last_cmd = cmd;
        have_last_cmd = true;
        ++tick;
        if (recorder.done()) break;
      }
    }
  } else {
    // Asynchronous: execution ticks continuously; a new observation goes out
    // as soon as the previous response lands.
    struct Pending {
      int sent_tick = 0;
      int arrival_tick = 0;
      ChunkResponse resp;
    };
    struct Current {
      Matrix chunk;
      std::vector<double> ref_q;
      int base_tick = 0;
    };
    std::optional<Pending> pending;
    std::optional<Current> current;
    std::vector<double> hold_cmd = plant.q;

    auto dispatch = [&](int tick) {
      const int executed = current ? tick - current->base_tick : 0;
      const std::int64_t reported = seq > 0 ? cfg.inject_latency_ns : 0;
      ++seq;
      const ObservationRequest req =
          make_request(engine, cfg.session, seq, tick * period_ns, plant, task,
                       std::clamp(executed, 0, horizon), reported);
      Pending p;
      p.sent_tick = tick;
      p.arrival_tick = tick + std::max(1, latency_ticks);
      p.resp = engine.infer(session, req);
      ++inference_calls;
      pending = std::move(p);
    };

    dispatch(0);
    for (int tick = 0; tick < cfg.success.max_ticks && !recorder.done(); ++tick) {
      if (pending && tick >= pending->arrival_tick) {
        const int row = tick - pending->sent_tick;
        if (row >= horizon) {
          ++starvation;  // response landed after its whole window passed
        } else {
          const std::vector<double> new_cmd =
              chunk_command(chain, pending->resp.chunk, pending->resp.reference_q, row);
          if (current) {
            const int old_row = std::min(tick - current->base_tick, horizon - 1);
            const std::vector<double> old_cmd =
                chunk_command(chain, current->chunk, current->ref_q, old_row);
            recorder.record_switch(new_cmd, old_cmd);
          }
          current = Current{std::move(pending->resp.chunk),
                            std::move(pending->resp.reference_q), pending->sent_tick};
        }
        pending.reset();
        dispatch(tick);
      }

      std::vector<double> cmd;
      if (current) {
        const int row = tick - current->base_tick;
        if (row >= horizon) {
          ++starvation;  // executor ran past the chunk; hold
          cmd = hold_cmd;
        } else {
          cmd = chunk_command(chain, current->chunk, current->ref_q, row);
          hold_cmd = cmd;
        }
      } else {
        cmd = hold_cmd;  // no chunk yet; hold at start
      }
      step_plant(plant, cmd, plant_cfg);
      recorder.record_tick(plant);
    }
  }

  RolloutResult result;
  result.metrics = recorder.finish(starvation, inference_calls);
  char desc[128];
  std::snprintf(desc, sizeof(desc), "reach2d target=(%.4f,%.4f) mode=%s",
                task.target[0], task.target[1],
                cfg.mode == RolloutMode::kSync ? "sync" : "async");
  result.episode =
      history_to_episode(chain, recorder.history(), period_ns, desc);
  return result;
}

std::vector<CellSummary> run_benchmark(const KinematicChain& chain,
                                       const BenchConfig& cfg,
                                       std::ostream* progress) {
  std::vector<CellSummary> out;
  for (const BenchCell& cell : cfg.cells) {
    EngineConfig ecfg;
    ecfg.rtc_enabled = cell.rtc;
    ecfg.fusion_window = cell.fusion_window;
    ecfg.decay = cell.decay;
    ecfg.sample_steps = cfg.sample_steps;
    ecfg.control_period_ns = cfg.control_period_ns;
    ecfg.seed = cfg.seed;
    const InferenceEngine engine = load_engine(cell.model_path, chain, ecfg);

    CellSummary summary;
    summary.cell = cell;
    summary.rollouts = cfg.rollouts;

    std::vector<double> completions;
    std::vector<double> jerks;
    int successes = 0;
    double disc_sum = 0.0;
    int disc_count = 0;
    for (int k = 0; k < cfg.rollouts; ++k) {
      RolloutConfig rcfg;
      rcfg.mode = cell.mode;
      rcfg.inject_latency_ns = cell.inject_latency_ns;
      rcfg.sync_effective_steps = cell.sync_effective_steps;
      rcfg.success = cfg.success;
      rcfg.plant_vmax = cfg.plant_vmax;
      rcfg.session = static_cast<std::uint64_t>(k) + 1;
      const ReachTask task = sample_reach_task(chain, cfg.seed * 1000003ull + k);
      const RolloutResult res = run_rollout(engine, task, rcfg);
      if (res.metrics.success) {
        ++successes;
        completions.push_back(res.metrics.completion_s);
      }
      jerks.push_back(res.metrics.mean_abs_jerk);
      summary.max_switch_discontinuity = std::max(
          summary.max_switch_discontinuity, res.metrics.max_switch_discontinuity);
      disc_sum += res.metrics.mean_switch_discontinuity * res.metrics.switches;
      disc_count += res.metrics.switches;
      summary.starvation_total += res.metrics.starvation_count;
    }
    summary.success_rate = static_cast<double>(successes) / cfg.rollouts;
    auto mean_std = [](const std::vector<double>& v, double& mean, double& std_out) {
      if (v.empty()) {
        mean = std_out = 0.0;
        return;
      }
      double s = 0.0;
      for (double x : v) s += x;
      mean = s / v.size();
      double var = 0.0;
      for (double x : v) var += (x - mean) * (x - mean);
      std_out = std::sqrt(var / v.size());
    };
    mean_std(completions, summary.completion_mean_s, summary.completion_std_s);
    mean_std(jerks, summary.jerk_mean, summary.jerk_std);
    summary.mean_switch_discontinuity = disc_count ? disc_sum / disc_count : 0.0;
    out.push_back(summary);
    if (progress) {
      *progress << cell.name << ": success " << summary.success_rate * 100.0
                << "%, completion " << summary.completion_mean_s << " s, max disc "
                << summary.max_switch_discontinuity << "\n";
    }
  }
  return out;
}

std::string benchmark_csv(const std::vector<CellSummary>& cells) {
  std::ostringstream os;
  os << "cell,mode,rtc,decay,tf_ratio,rollouts,success_rate,completion_mean_s,"
        "completion_std_s,jerk_mean,jerk_std,max_switch_disc,mean_switch_disc,"
        "starvation_total\n";
  for (const CellSummary& s : cells) {
    os << s.cell.name << ','
       << (s.cell.mode == RolloutMode::kSync ? "sync" : "async") << ','
       << (s.cell.rtc ? "on" : "off") << ',' << decay_kind_name(s.cell.decay) << ','
       << s.cell.tf_ratio_label << ',' << s.rollouts << ',' << s.success_rate << ','
       << s.completion_mean_s << ',' << s.completion_std_s << ',' << s.jerk_mean
       << ',' << s.jerk_std << ',' << s.max_switch_discontinuity << ','
       << s.mean_switch_discontinuity << ',' << s.starvation_total << '\n';
  }
  return os.str();
}

BenchConfig bench_config_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedJson(e.what());
  }
  BenchConfig cfg;
  try {
    cfg.rollouts = j.value("rollouts", 100);
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.plant_vmax = j.value("plant_vmax", 5.0);
    cfg.control_period_ns = j.value("control_period_ns", std::int64_t{20'000'000});
    cfg.sample_steps = j.value("sample_steps", 10);
    if (j.contains("success")) {
      cfg.success.tolerance_m = j["success"].value("tolerance_m", 0.02);
      cfg.success.hold_ticks = j["success"].value("hold_ticks", 10);
      cfg.success.max_ticks = j["success"].value("max_ticks", 400);
    }
    for (const auto& c : j.at("cells")) {
      BenchCell cell;
      cell.name = c.at("name").get<std::string>();
      cell.model_path = c.at("model").get<std::string>();
      cell.mode = c.value("mode", "async") == "sync" ? RolloutMode::kSync
                                                     : RolloutMode::kAsync;
      cell.rtc = c.value("rtc", true);
      cell.decay = decay_kind_from_name(c.value("decay", "linear"));
      cell.fusion_window = c.value("fusion_window", 8);
      cell.inject_latency_ns =
          static_cast<std::int64_t>(c.value("inject_ms", 300.0) * 1e6);
      cell.sync_effective_steps = c.value("sync_effective_steps", 16);
      cell.tf_ratio_label = c.value("tf_ratio", 0.0);
      cfg.cells.push_back(std::move(cell));
    }
  } catch (const nlohmann::json::exception& e) {
    throw MalformedJson("bench config: " + std::string(e.what()));
  }
  if (cfg.cells.empty()) throw ConfigError("bench config has no cells");
  return cfg;
}

}  // namespace chunkrt
