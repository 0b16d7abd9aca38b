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

#ifndef CHUNKRT_SAMPLER_HPP_
#define CHUNKRT_SAMPLER_HPP_

#include <functional>
#include <random>

#include "chunkrt/matrix.hpp"
#include "chunkrt/schedule.hpp"

namespace chunkrt {

// x-prediction denoiser: maps (noisy chunk, timestep) to an estimate of the
// clean chunk with the same shape. Observation features are bound by the
// caller.
using DenoiseFn = std::function<Matrix(const Matrix& x, int tau)>;

// Hook applied to the x-prediction before each sampler update; identity when
// absent. Chunk-consistency guidance plugs in here.
using GuidanceFn = std::function<Matrix(Matrix x0_hat, int tau)>;

// x_tau = sqrt(alpha_bar_tau) x0 + sqrt(1 - alpha_bar_tau) eps.
Matrix add_noise(const NoiseSchedule& sched, const Matrix& x0, const Matrix& eps,
                 int tau);

// One stochastic posterior step from level tau to tau - 1. At tau == 1 the
// variance is dropped and the mean is returned.
Matrix ancestral_step(const NoiseSchedule& sched, const Matrix& x_tau,
                      const Matrix& x0_hat, int tau, const Matrix& noise_draw);

// Full T-step ancestral chain from x_init at level T-1 down to 0; the final
// output is the last (possibly guided) x-prediction.
Matrix ancestral_sample(const NoiseSchedule& sched, const Matrix& x_init,
                        const DenoiseFn& denoiser, std::mt19937_64& rng,
                        const GuidanceFn& guidance = nullptr);

// Timesteps visited by the strided fast sampler: T-1, T-1-T/steps, ...
std::vector<int> sampler_ladder(int schedule_steps, int sample_steps);

// Deterministic (zero-variance) x-prediction sampler over a strided timestep
// ladder. Runs `steps` denoiser calls; after the last one the (guided)
// x-prediction is returned as-is.
Matrix deterministic_denoise(const NoiseSchedule& sched, const Matrix& x_init,
                             const DenoiseFn& denoiser, int steps,
                             const GuidanceFn& guidance = nullptr);

// Teacher-forcing configuration: with probability `ratio`, the first
// N ~ Poisson(poisson_mean) rows of the noisy chunk are overwritten with
// ground truth (N clamped to the horizon).
struct TeacherForcingConfig {
  double poisson_mean = 16.0;
  double ratio = 0.25;
};

struct TeacherForcedInput {
  Matrix chunk;
  bool applied = false;
  int prefix = 0;
};

int draw_prefix_length(const TeacherForcingConfig& cfg, int horizon,
                       std::mt19937_64& rng);

TeacherForcedInput teacher_forced_input(const Matrix& x_noise, const Matrix& x_gt,
                                        const TeacherForcingConfig& cfg,
                                        std::mt19937_64& rng);

}  // namespace chunkrt

#endif  // CHUNKRT_SAMPLER_HPP_
