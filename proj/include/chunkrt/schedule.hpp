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

#ifndef CHUNKRT_SCHEDULE_HPP_
#define CHUNKRT_SCHEDULE_HPP_

#include <vector>

namespace chunkrt {

// Cosine ("squaredcos_cap_v2") beta schedule tables. Index t covers the
// state after t+1 noising steps, so alpha_bar[0] is just below 1 and
// alpha_bar[T-1] is close to 0.
struct NoiseSchedule {
  int steps = 0;  // T
  std::vector<double> beta;
  std::vector<double> alpha;
  std::vector<double> alpha_bar;
};

// f(x) = cos^2((x + s)/(1 + s) * pi/2) with s = 0.008;
// beta_t = min(1 - f((t+1)/T)/f(t/T), 0.999); alpha_bar is the running
// product of (1 - beta), i.e. the telescoped f((t+1)/T)/f(0) until the
// clamp engages.
NoiseSchedule build_cosine_schedule(int steps);

}  // namespace chunkrt

#endif  // CHUNKRT_SCHEDULE_HPP_
