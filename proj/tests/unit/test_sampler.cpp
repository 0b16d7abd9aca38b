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

#include <doctest.h>

#include "chunkrt/errors.hpp"
#include "chunkrt/sampler.hpp"

namespace chunkrt {
namespace {

Matrix constant_matrix(int rows, int cols, double v) {
  Matrix m(rows, cols);
  for (double& x : m.data) x = v;
  return m;
}

TEST_CASE("add_noise interpolates between signal and noise") {
  const NoiseSchedule sched = build_cosine_schedule(1000);
  std::mt19937_64 rng(1);
  const Matrix x0 = randn_matrix(4, 6, rng);
  const Matrix eps = randn_matrix(4, 6, rng);

  // Early timestep: nearly the clean signal.
  const Matrix lo = add_noise(sched, x0, eps, 0);
  CHECK(rms_diff(lo, x0) < 0.05);
  // Final timestep: nearly the raw noise.
  const Matrix hi = add_noise(sched, x0, eps, 999);
  CHECK(rms_diff(hi, eps) < 0.05);

  // Plug-in check at alpha_bar = 0.25: x = x0/2 + sqrt(3)/2 eps.
  int tau = 0;
  while (sched.alpha_bar[tau] > 0.25) ++tau;
  // Interpolate by hand with the actual table entry.
  const double a = std::sqrt(sched.alpha_bar[tau]);
  const double b = std::sqrt(1.0 - sched.alpha_bar[tau]);
  const Matrix mid = add_noise(sched, x0, eps, tau);
  for (std::size_t i = 0; i < mid.data.size(); ++i) {
    CHECK(mid.data[i] == doctest::Approx(a * x0.data[i] + b * eps.data[i]));
  }

  CHECK_THROWS_AS(add_noise(sched, x0, eps, 1000), TimestepOutOfRange);
  CHECK_THROWS_AS(add_noise(sched, x0, eps, -1), TimestepOutOfRange);
}

TEST_CASE("marginal variance matches the schedule") {
  const NoiseSchedule sched = build_cosine_schedule(1000);
  std::mt19937_64 rng(5);
  const Matrix x0 = randn_matrix(8, 8, rng);  // fixed draw; var(x0) term uses it
  double x0_var = 0.0;
  double x0_mean = 0.0;
  for (double v : x0.data) x0_mean += v;
  x0_mean /= x0.data.size();
  for (double v : x0.data) x0_var += (v - x0_mean) * (v - x0_mean);
  x0_var /= x0.data.size();

  for (int tau : {50, 400, 850}) {
    const int draws = 3000;
    double mean = 0.0, sq = 0.0;
    std::size_t count = 0;
    for (int d = 0; d < draws; ++d) {
      const Matrix eps = randn_matrix(8, 8, rng);
      const Matrix x = add_noise(sched, x0, eps, tau);
      for (double v : x.data) {
        mean += v;
        sq += v * v;
        ++count;
      }
    }
    mean /= count;
    const double var = sq / count - mean * mean;
    const double expect =
        (1.0 - sched.alpha_bar[tau]) + sched.alpha_bar[tau] * x0_var;
    CHECK(std::abs(var - expect) / expect < 0.05);
  }
}

TEST_CASE("ancestral step is a convex fixed point on constants") {
  const NoiseSchedule sched = build_cosine_schedule(1000);
  const Matrix c = constant_matrix(2, 3, 1.7);
  const Matrix zero = constant_matrix(2, 3, 0.0);
  // sigma is dropped at tau = 1, so this is the pure posterior mean.
  const Matrix out = ancestral_step(sched, c, c, 1, zero);
  for (double v : out.data) CHECK(v == doctest::Approx(1.7).epsilon(1e-9));

  // Deterministic with a zero draw at any tau.
  const Matrix out2 = ancestral_step(sched, c, c, 500, zero);
  const Matrix out2_again = ancestral_step(sched, c, c, 500, zero);
  CHECK(out2 == out2_again);

  CHECK_THROWS_AS(ancestral_step(sched, c, c, 0, zero), TimestepOutOfRange);
}

TEST_CASE("oracle denoiser: ancestral chain recovers x0") {
  const NoiseSchedule sched = build_cosine_schedule(1000);
  std::mt19937_64 rng(9);
  const Matrix x0 = randn_matrix(4, 8, rng);
  const DenoiseFn oracle = [&](const Matrix&, int) { return x0; };
  const Matrix start = randn_matrix(4, 8, rng);
  const Matrix out = ancestral_sample(sched, start, oracle, rng);
  CHECK(rms_diff(out, x0) < 1e-3);
}

TEST_CASE("ladder strides from T-1 down in T/steps hops") {
  const std::vector<int> ladder = sampler_ladder(1000, 10);
  REQUIRE(ladder.size() == 10);
  CHECK(ladder.front() == 999);
  CHECK(ladder[1] == 899);
  CHECK(ladder.back() == 99);
  const std::vector<int> single = sampler_ladder(1000, 1);
  REQUIRE(single.size() == 1);
  CHECK(single[0] == 999);
}

TEST_CASE("oracle denoiser: deterministic sampler is exact") {
  const NoiseSchedule sched = build_cosine_schedule(1000);
  std::mt19937_64 rng(11);
  const Matrix x0 = randn_matrix(3, 5, rng);
  const DenoiseFn oracle = [&](const Matrix&, int) { return x0; };
  const Matrix start = randn_matrix(3, 5, rng);
  // Output is the final x-prediction: exact even with one step.
  CHECK(deterministic_denoise(sched, start, oracle, 1) == x0);
  CHECK(deterministic_denoise(sched, start, oracle, 10) == x0);
}

TEST_CASE("identity guidance changes nothing, bit for bit") {
  const NoiseSchedule sched = build_cosine_schedule(1000);
  std::mt19937_64 rng(13);
  const Matrix x0 = randn_matrix(3, 5, rng);
  const Matrix w = randn_matrix(5, 3 * 5, rng);
  // A fake but deterministic denoiser with some timestep dependence.
  const DenoiseFn denoiser = [&](const Matrix& x, int tau) {
    Matrix out = x;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
      out.data[i] = 0.9 * x.data[i] + 0.01 * w.data[i % w.data.size()] -
                    1e-4 * static_cast<double>(tau);
    }
    return out;
  };
  const Matrix start = randn_matrix(3, 5, rng);
  const Matrix plain = deterministic_denoise(sched, start, denoiser, 10);
  const GuidanceFn identity = [](Matrix x, int) { return x; };
  const Matrix guided = deterministic_denoise(sched, start, denoiser, 10, identity);
  CHECK(plain == guided);
}

TEST_CASE("teacher forcing rewrites exactly the prefix") {
  std::mt19937_64 rng(17);
  const Matrix noise = randn_matrix(16, 4, rng);
  const Matrix gt = randn_matrix(16, 4, rng);

  TeacherForcingConfig always;
  always.ratio = 1.0;
  always.poisson_mean = 6.0;
  const TeacherForcedInput forced = teacher_forced_input(noise, gt, always, rng);
  CHECK(forced.applied);
  for (int t = 0; t < forced.prefix; ++t) {
    for (int c = 0; c < 4; ++c) CHECK(forced.chunk.at(t, c) == gt.at(t, c));
  }
  for (int t = forced.prefix; t < 16; ++t) {
    for (int c = 0; c < 4; ++c) CHECK(forced.chunk.at(t, c) == noise.at(t, c));
  }

  TeacherForcingConfig never;
  never.ratio = 0.0;
  const TeacherForcedInput skipped = teacher_forced_input(noise, gt, never, rng);
  CHECK_FALSE(skipped.applied);
  CHECK(skipped.chunk == noise);
}

TEST_CASE("prefix draws cover the degenerate endpoints") {
  std::mt19937_64 rng(19);
  TeacherForcingConfig cfg;
  cfg.poisson_mean = 0.0;  // always zero rows
  CHECK(draw_prefix_length(cfg, 64, rng) == 0);
  cfg.poisson_mean = 1000.0;  // clamps to the horizon
  CHECK(draw_prefix_length(cfg, 8, rng) == 8);
}

TEST_CASE("teacher forcing statistics follow the configuration") {
  std::mt19937_64 rng(23);
  TeacherForcingConfig cfg;  // defaults: mean 16, ratio 0.25
  const int draws = 10000;
  double mean_prefix = 0.0;
  for (int i = 0; i < draws; ++i) {
    mean_prefix += draw_prefix_length(cfg, 64, rng);
  }
  mean_prefix /= draws;
  CHECK(mean_prefix > 15.5);
  CHECK(mean_prefix < 16.5);

  const Matrix noise = constant_matrix(4, 2, 0.0);
  const Matrix gt = constant_matrix(4, 2, 1.0);
  int applied = 0;
  for (int i = 0; i < draws; ++i) {
    if (teacher_forced_input(noise, gt, cfg, rng).applied) ++applied;
  }
  const double rate = static_cast<double>(applied) / draws;
  CHECK(rate > cfg.ratio - 0.02);
  CHECK(rate < cfg.ratio + 0.02);
}

}  // namespace
}  // namespace chunkrt
