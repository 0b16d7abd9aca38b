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

#include "chunkrt/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chunkrt/errors.hpp"

namespace chunkrt {

namespace {

void check_tau(const NoiseSchedule& sched, int tau, int lo) {
  if (tau < lo || tau >= sched.steps) {
    throw TimestepOutOfRange("timestep " + std::to_string(tau) + " outside [" +
                             std::to_string(lo) + ", " + std::to_string(sched.steps) +
                             ")");
  }
}

}  // namespace

Matrix add_noise(const NoiseSchedule& sched, const Matrix& x0, const Matrix& eps,
                 int tau) {
  check_tau(sched, tau, 0);
  if (!x0.same_shape(eps)) throw ShapeMismatch("add_noise: x0/eps shapes differ");
  const double a = std::sqrt(sched.alpha_bar[tau]);
  const double b = std::sqrt(1.0 - sched.alpha_bar[tau]);
  Matrix out = x0;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = a * x0.data[i] + b * eps.data[i];
  }
  return out;
}

Matrix ancestral_step(const NoiseSchedule& sched, const Matrix& x_tau,
                      const Matrix& x0_hat, int tau, const Matrix& noise_draw) {
  check_tau(sched, tau, 1);
  if (!x_tau.same_shape(x0_hat) || !x_tau.same_shape(noise_draw)) {
    throw ShapeMismatch("ancestral_step: shapes differ");
  }
  const double abar = sched.alpha_bar[tau];
  const double abar_prev = sched.alpha_bar[tau - 1];
  const double beta = sched.beta[tau];
  const double alpha = sched.alpha[tau];
  const double c0 = std::sqrt(abar_prev) * beta / (1.0 - abar);
  const double c1 = std::sqrt(alpha) * (1.0 - abar_prev) / (1.0 - abar);
  const double sigma =
      tau == 1 ? 0.0 : std::sqrt(beta * (1.0 - abar_prev) / (1.0 - abar));
  Matrix out = x_tau;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = c0 * x0_hat.data[i] + c1 * x_tau.data[i] + sigma * noise_draw.data[i];
  }
  return out;
}

Matrix ancestral_sample(const NoiseSchedule& sched, const Matrix& x_init,
                        const DenoiseFn& denoiser, std::mt19937_64& rng,
                        const GuidanceFn& guidance) {
  Matrix x = x_init;
  for (int tau = sched.steps - 1; tau >= 1; --tau) {
    Matrix x0_hat = denoiser(x, tau);
    if (guidance) x0_hat = guidance(std::move(x0_hat), tau);
    const Matrix noise = randn_matrix(x.rows, x.cols, rng);
    x = ancestral_step(sched, x, x0_hat, tau, noise);
  }
  // Level 0 sits one noising step above the data; the x-prediction there is
  // the chain's output.
  Matrix x0_hat = denoiser(x, 0);
  if (guidance) x0_hat = guidance(std::move(x0_hat), 0);
  return x0_hat;
}

std::vector<int> sampler_ladder(int schedule_steps, int sample_steps) {
  if (sample_steps < 1) {
    throw TimestepOutOfRange("sampler needs at least 1 step");
  }
  std::vector<int> ladder;
  ladder.reserve(sample_steps);
  for (int k = 0; k < sample_steps; ++k) {
    const long tau = static_cast<long>(schedule_steps) - 1 -
                     (static_cast<long>(k) * schedule_steps) / sample_steps;
    ladder.push_back(static_cast<int>(std::max(0L, tau)));
  }
  // Clamping near the bottom may duplicate entries for very dense ladders.
  ladder.erase(std::unique(ladder.begin(), ladder.end()), ladder.end());
  return ladder;
}

Matrix deterministic_denoise(const NoiseSchedule& sched, const Matrix& x_init,
                             const DenoiseFn& denoiser, int steps,
                             const GuidanceFn& guidance) {
  const std::vector<int> ladder = sampler_ladder(sched.steps, steps);
  Matrix x = x_init;
  Matrix x0_hat;
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    const int tau = ladder[k];
    x0_hat = denoiser(x, tau);
    if (guidance) x0_hat = guidance(std::move(x0_hat), tau);
    if (k + 1 == ladder.size()) break;
    // Re-project the implied noise onto the next (lower) noise level.
    const int next = ladder[k + 1];
    const double abar = sched.alpha_bar[tau];
    const double abar_next = sched.alpha_bar[next];
    const double denom = std::sqrt(1.0 - abar);
    const double scale = std::sqrt(1.0 - abar_next) / denom;
    const double a = std::sqrt(abar);
    const double a_next = std::sqrt(abar_next);
    for (std::size_t i = 0; i < x.data.size(); ++i) {
      const double eps_hat = x.data[i] - a * x0_hat.data[i];
      x.data[i] = a_next * x0_hat.data[i] + scale * eps_hat;
    }
  }
  return x0_hat;
}

int draw_prefix_length(const TeacherForcingConfig& cfg, int horizon,
                       std::mt19937_64& rng) {
  std::poisson_distribution<int> poisson(cfg.poisson_mean);
  return std::clamp(poisson(rng), 0, horizon);
}

TeacherForcedInput teacher_forced_input(const Matrix& x_noise, const Matrix& x_gt,
                                        const TeacherForcingConfig& cfg,
                                        std::mt19937_64& rng) {
  if (!x_noise.same_shape(x_gt)) {
    throw ShapeMismatch("teacher_forced_input: shapes differ");
  }
  TeacherForcedInput out;
  out.chunk = x_noise;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (unif(rng) >= cfg.ratio) return out;
  out.applied = true;
  out.prefix = draw_prefix_length(cfg, x_noise.rows, rng);
  for (int t = 0; t < out.prefix; ++t) {
    std::copy_n(x_gt.row(t).begin(), x_gt.cols, out.chunk.row(t).begin());
  }
  return out;
}

}  // namespace chunkrt
