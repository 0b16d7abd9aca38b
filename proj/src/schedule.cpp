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

#include "chunkrt/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chunkrt/errors.hpp"

namespace chunkrt {

NoiseSchedule build_cosine_schedule(int steps) {
  if (steps < 2) {
    throw TimestepOutOfRange("schedule needs at least 2 steps, got " +
                             std::to_string(steps));
  }
  constexpr double kOffset = 0.008;
  constexpr double kMaxBeta = 0.999;
  auto f = [&](double x) {
    const double c = std::cos((x + kOffset) / (1.0 + kOffset) * M_PI / 2.0);
    return c * c;
  };

  NoiseSchedule sched;
  sched.steps = steps;
  sched.beta.resize(steps);
  sched.alpha.resize(steps);
  sched.alpha_bar.resize(steps);
  double running = 1.0;
  for (int t = 0; t < steps; ++t) {
    const double ratio = f(static_cast<double>(t + 1) / steps) /
                         f(static_cast<double>(t) / steps);
    sched.beta[t] = std::min(1.0 - ratio, kMaxBeta);
    sched.alpha[t] = 1.0 - sched.beta[t];
    running *= sched.alpha[t];
    sched.alpha_bar[t] = running;
  }
  return sched;
}

}  // namespace chunkrt
