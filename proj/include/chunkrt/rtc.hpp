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

#ifndef CHUNKRT_RTC_HPP_
#define CHUNKRT_RTC_HPP_

#include <optional>
#include <vector>

#include "chunkrt/matrix.hpp"
#include "chunkrt/sampler.hpp"

namespace chunkrt {

enum class DecayKind { kLinear, kQuadratic, kExponential };

const char* decay_kind_name(DecayKind k);
DecayKind decay_kind_from_name(const std::string& name);

// Real-time chunking guidance configuration. `delay` counts control steps the
// new chunk lags behind the observation; `fusion_window` is the length of the
// transition from full history influence down to none.
struct RtcConfig {
  int delay = 0;           // d
  int fusion_window = 8;   // L >= 1
  DecayKind decay = DecayKind::kLinear;
  int horizon = 64;        // H
};

// Residual influence of the previous chunk per step:
// 1 on [0, d], 1 - (t - d)/L on (d, d+L), 0 on [d+L, H).
std::vector<double> compute_rho(const RtcConfig& cfg);

// Non-increasing per-step weights in [0, 1].
struct GuidanceWeights {
  std::vector<double> w;
};

// linear: w = rho; quadratic: w = rho^2; exponential: w = rho (e^rho - 1)/(e - 1).
GuidanceWeights compute_weights(const std::vector<double>& rho, DecayKind decay);

// The unexecuted remainder of the previous chunk, shifted to align with the
// new chunk's rows. Rows beyond the remainder are unavailable.
struct AlignedPrev {
  Matrix rows;                        // horizon x dim, zero-filled where unavailable
  std::vector<std::uint8_t> available;  // per row
};

AlignedPrev align_previous_chunk(const Matrix& prev, int executed, int horizon);

// Zeroes weights on unavailable rows.
void mask_unavailable(GuidanceWeights& weights, const AlignedPrev& prev);

// blend = w * a_prev + (1 - w) * x0_hat, broadcast across columns.
Matrix blend(const Matrix& x0_hat, const AlignedPrev& a_prev,
             const GuidanceWeights& weights);

// Wraps the deterministic sampler with per-step blending toward the previous
// chunk. Without a previous chunk this is exactly the unguided sampler.
Matrix guided_denoise(const NoiseSchedule& sched, const Matrix& x_init,
                      const DenoiseFn& denoiser, int sample_steps,
                      const std::optional<AlignedPrev>& prev, const RtcConfig& cfg);

}  // namespace chunkrt

#endif  // CHUNKRT_RTC_HPP_
