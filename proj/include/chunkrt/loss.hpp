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

#ifndef CHUNKRT_LOSS_HPP_
#define CHUNKRT_LOSS_HPP_

#include <span>
#include <vector>

#include "chunkrt/embodiment.hpp"
#include "chunkrt/matrix.hpp"

namespace chunkrt {

// |x| < beta: x^2 / (2 beta); otherwise |x| - beta/2.
double smooth_l1(double x, double beta);
double smooth_l1_grad(double x, double beta);

// Timestep weighting T / (tau + 1): low-noise samples dominate.
double alpha_tau(int tau, int total_steps);

struct LossWeights {
  double lambda_joint = 1.0;
  double lambda_pose = 1.0;
  double lambda_pose_fk = 1.0;
  // Depth head is not part of this runtime; the slot exists so the total
  // keeps the published four-term shape.
  double lambda_depth = 0.0;
  double smooth_l1_beta = 0.04;
  int diffusion_steps = 1000;  // T
};

struct LossTerms {
  double joint = 0.0;
  double pose = 0.0;
  double pose_fk = 0.0;
  double total = 0.0;
};

// Both chunks hold per-step hybrid deltas relative to `current`. The loss is
// evaluated on absolute values: joint positions, pose 7-vectors, and poses
// recomputed by FK from the predicted absolute joints.
// When `grad_out` is given it receives dTotal/dPred (same shape as pred).
LossTerms compute_losses(const Matrix& pred, const Matrix& gt,
                         const RobotState& current, const KinematicChain& chain,
                         int tau, const LossWeights& weights,
                         Matrix* grad_out = nullptr);

// Winner-takes-more candidate weighting. Mean of the returned weights is 1.
struct WtmConfig {
  int candidates = 4;  // N
  double winner_weight = 2.0;

  double loser_weight() const {
    return (candidates - winner_weight) / (candidates - 1);
  }
};

// Lowest error wins (ties broken by the lowest index).
std::vector<double> wtm_weights(std::span<const double> errors, const WtmConfig& cfg);

}  // namespace chunkrt

#endif  // CHUNKRT_LOSS_HPP_
