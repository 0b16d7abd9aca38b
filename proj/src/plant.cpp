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

#include "chunkrt/plant.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chunkrt/errors.hpp"

namespace chunkrt {

PlantState make_plant_state(std::span<const double> q0) {
  PlantState s;
  s.q.assign(q0.begin(), q0.end());
  s.qd.assign(q0.size(), 0.0);
  return s;
}

void step_plant(PlantState& state, std::span<const double> command,
                const PlantConfig& cfg) {
  if (command.size() != state.q.size() || cfg.vmax.size() != state.q.size()) {
    throw DimensionMismatch("plant command has " + std::to_string(command.size()) +
                            " entries, expected " + std::to_string(state.q.size()));
  }
  for (std::size_t i = 0; i < state.q.size(); ++i) {
    const double limit = cfg.step_limit(i);
    const double delta = std::clamp(command[i] - state.q[i], -limit, limit);
    state.q[i] += delta;
    state.qd[i] = delta / cfg.period_s;
  }
}

}  // namespace chunkrt
