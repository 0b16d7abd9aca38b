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

#ifndef CHUNKRT_TRAINER_HPP_
#define CHUNKRT_TRAINER_HPP_

#include <random>
#include <span>
#include <vector>

#include "chunkrt/denoiser.hpp"
#include "chunkrt/loss.hpp"
#include "chunkrt/sampler.hpp"
#include "chunkrt/schedule.hpp"

namespace chunkrt {

struct TrainSample {
  std::vector<double> obs;
  Matrix gt;  // horizon x action_dim hybrid deltas
  RobotState current;
};

// One sample's frozen randomness: shared timestep, per-candidate noisings
// with teacher forcing already applied. Loss and gradients are deterministic
// functions of the parameters given this.
struct FrozenCandidates {
  int tau = 0;
  std::vector<Matrix> noisy;
};

struct TrainerConfig {
  int steps = 2000;
  int batch = 16;
  double lr = 1e-3;
  double momentum = 0.9;
  // The timestep weighting spans three orders of magnitude, so raw batch
  // gradients are heavy-tailed; clipping keeps single draws from derailing
  // plain gradient descent. 0 disables.
  double max_grad_norm = 10.0;
  double lr_decay_factor = 0.1;   // applied once, late in training
  double lr_decay_at = 0.9;       // fraction of steps
  TeacherForcingConfig tf;
  double tf_enabled_ratio() const { return tf.ratio; }
  WtmConfig wtm;
  bool wtm_enabled = true;
  LossWeights weights;
  std::uint64_t seed = 0;
};

FrozenCandidates make_candidates(const Matrix& gt, const NoiseSchedule& sched,
                                 const TeacherForcingConfig& tf, int candidates,
                                 std::mt19937_64& rng);

// Weighted candidate loss for one sample; accumulates parameter gradients
// into `grad` when given (each candidate back-propagated with weight
// w_k / N * scale).
double sample_loss_and_grad(const ToyDenoiser& model, const KinematicChain& chain,
                            const TrainSample& sample, const FrozenCandidates& frozen,
                            const LossWeights& weights, const WtmConfig& wtm,
                            bool wtm_enabled, std::vector<double>* grad,
                            double scale = 1.0);

class Trainer {
 public:
  Trainer(ToyDenoiser& model, const KinematicChain& chain, NoiseSchedule schedule,
          TrainerConfig cfg);

  // One gradient-descent step over the batch; returns the batch loss.
  double step(std::span<const TrainSample> batch);

  int steps_taken() const { return steps_taken_; }
  std::mt19937_64& rng() { return rng_; }
  const TrainerConfig& config() const { return cfg_; }

 private:
  ToyDenoiser& model_;
  const KinematicChain& chain_;
  NoiseSchedule schedule_;
  TrainerConfig cfg_;
  std::vector<double> velocity_;
  std::vector<double> grad_;
  std::mt19937_64 rng_;
  int steps_taken_ = 0;
};

// Central differences over `count` randomly chosen parameters; returns the
// maximum relative error |g_a - g_fd| / max(1e-8, |g_a| + |g_fd|).
double finite_diff_check(ToyDenoiser& model, const KinematicChain& chain,
                         const TrainSample& sample, const FrozenCandidates& frozen,
                         const LossWeights& weights, const WtmConfig& wtm,
                         bool wtm_enabled, int count, double h, std::mt19937_64& rng);

}  // namespace chunkrt

#endif  // CHUNKRT_TRAINER_HPP_
