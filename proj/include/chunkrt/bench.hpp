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

#ifndef CHUNKRT_BENCH_HPP_
#define CHUNKRT_BENCH_HPP_

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "chunkrt/engine.hpp"
#include "chunkrt/episode.hpp"
#include "chunkrt/plant.hpp"

namespace chunkrt {

// Closed-loop rollouts run on a virtual clock: inference results become
// visible after the injected latency, the plant ticks at the control period,
// and every random draw is seeded. Identical inputs give identical metrics.

enum class RolloutMode { kSync, kAsync };

struct ReachTask {
  std::vector<double> start_q;
  std::array<double, 2> target{};
};

struct SuccessSpec {
  double tolerance_m = 0.02;
  int hold_ticks = 10;
  int max_ticks = 400;
};

struct RolloutConfig {
  RolloutMode mode = RolloutMode::kAsync;
  std::int64_t inject_latency_ns = 300'000'000;
  // Sync mode executes this many rows per chunk before re-observing
  // (0 = the full horizon).
  int sync_effective_steps = 16;
  SuccessSpec success;
  double plant_vmax = 5.0;  // per joint, units/s
  std::uint64_t session = 1;
};

struct RolloutResult {
  RolloutMetrics metrics;
  Episode episode;
};

// Samples a reach task with the same distribution the expert dataset uses.
ReachTask sample_reach_task(const KinematicChain& chain, std::uint64_t seed);

RolloutResult run_rollout(const InferenceEngine& engine, const ReachTask& task,
                          const RolloutConfig& cfg);

struct BenchCell {
  std::string name;
  std::string model_path;
  RolloutMode mode = RolloutMode::kAsync;
  bool rtc = true;
  DecayKind decay = DecayKind::kLinear;
  int fusion_window = 8;
  std::int64_t inject_latency_ns = 300'000'000;
  int sync_effective_steps = 16;
  double tf_ratio_label = 0.0;  // carried through to the CSV
};

struct BenchConfig {
  std::vector<BenchCell> cells;
  int rollouts = 100;
  std::uint64_t seed = 0;
  SuccessSpec success;
  double plant_vmax = 5.0;
  std::int64_t control_period_ns = 20'000'000;
  int sample_steps = 10;
};

struct CellSummary {
  BenchCell cell;
  int rollouts = 0;
  double success_rate = 0.0;
  double completion_mean_s = 0.0;  // over successful rollouts
  double completion_std_s = 0.0;
  double jerk_mean = 0.0;
  double jerk_std = 0.0;
  double max_switch_discontinuity = 0.0;
  double mean_switch_discontinuity = 0.0;
  int starvation_total = 0;
};

std::vector<CellSummary> run_benchmark(const KinematicChain& chain,
                                       const BenchConfig& cfg,
                                       std::ostream* progress = nullptr);

std::string benchmark_csv(const std::vector<CellSummary>& cells);

BenchConfig bench_config_from_json(const std::string& json_text);

}  // namespace chunkrt

#endif  // CHUNKRT_BENCH_HPP_
