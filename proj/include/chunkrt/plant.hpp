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

#ifndef CHUNKRT_PLANT_HPP_
#define CHUNKRT_PLANT_HPP_

#include <span>
#include <vector>

#include "chunkrt/chain.hpp"

namespace chunkrt {

// Kinematic plant: tracks commanded joint targets under a per-tick rate
// limit. No dynamics; enough to expose chunk-boundary jerks and pauses.
struct PlantConfig {
  std::vector<double> vmax;  // per joint, units/s
  double period_s = 0.02;

  double step_limit(std::size_t joint) const { return vmax[joint] * period_s; }
};

struct PlantState {
  std::vector<double> q;
  std::vector<double> qd;
};

PlantState make_plant_state(std::span<const double> q0);

// Moves q toward the command, clipping each joint to vmax * period;
// velocities by finite difference.
void step_plant(PlantState& state, std::span<const double> command,
                const PlantConfig& cfg);

struct RolloutMetrics {
  bool success = false;
  double completion_s = 0.0;
  double mean_abs_jerk = 0.0;
  double max_switch_discontinuity = 0.0;
  double mean_switch_discontinuity = 0.0;
  int switches = 0;
  int starvation_count = 0;
  int ticks = 0;
  double final_distance_m = 0.0;
  int inference_calls = 0;
};

}  // namespace chunkrt

#endif  // CHUNKRT_PLANT_HPP_
