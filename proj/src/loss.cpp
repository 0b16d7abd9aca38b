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

#include "chunkrt/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chunkrt/errors.hpp"

namespace chunkrt {

double smooth_l1(double x, double beta) {
  const double ax = std::abs(x);
  return ax < beta ? 0.5 * x * x / beta : ax - 0.5 * beta;
}

double smooth_l1_grad(double x, double beta) {
  return std::abs(x) < beta ? x / beta : (x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0));
}

double alpha_tau(int tau, int total_steps) {
  if (tau < 0 || tau >= total_steps) {
    throw TimestepOutOfRange("alpha_tau: timestep " + std::to_string(tau) +
                             " outside [0, " + std::to_string(total_steps) + ")");
  }
  return static_cast<double>(total_steps) / static_cast<double>(tau + 1);
}

namespace {

// Copies a pose into [x y z qw qx qy qz] order.
inline void pose7(const Pose& pose, double* out) {
  out[0] = pose.position.x;
  out[1] = pose.position.y;
  out[2] = pose.position.z;
  out[3] = pose.orientation.w;
  out[4] = pose.orientation.x;
  out[5] = pose.orientation.y;
  out[6] = pose.orientation.z;
}

}  // namespace

LossTerms compute_losses(const Matrix& pred, const Matrix& gt,
                         const RobotState& current, const KinematicChain& chain,
                         int tau, const LossWeights& weights, Matrix* grad_out) {
  const int n = static_cast<int>(chain.njoints());
  if (!pred.same_shape(gt) || pred.cols != n * kActionDim ||
      current.q.size() != static_cast<std::size_t>(n)) {
    throw DimensionMismatch("compute_losses: chunk/chain shapes disagree");
  }
  const int horizon = pred.rows;
  const double at = alpha_tau(tau, weights.diffusion_steps);
  const double beta = weights.smooth_l1_beta;

  const double joint_count = static_cast<double>(horizon) * n;
  const double pose_count = static_cast<double>(horizon) * n * 7;

  if (grad_out != nullptr) *grad_out = Matrix(pred.rows, pred.cols);

  LossTerms terms;
  std::vector<double> q_pred(n), q_gt(n);
  std::vector<double> fk7(7), gt7(7), cur7(7);

  for (int h = 0; h < horizon; ++h) {
    const auto prow = pred.row(h);
    const auto grow = gt.row(h);
    for (int i = 0; i < n; ++i) {
      q_pred[i] = current.q[i] + prow[i * kActionDim];
      q_gt[i] = current.q[i] + grow[i * kActionDim];
    }

    // Joint-space term on absolute positions.
    for (int i = 0; i < n; ++i) {
      const double r = q_pred[i] - q_gt[i];
      terms.joint += smooth_l1(r, beta);
      if (grad_out) {
        grad_out->at(h, i * kActionDim) +=
            at * weights.lambda_joint * smooth_l1_grad(r, beta) / joint_count;
      }
    }

    // Direct pose term on absolute 7-vectors; the reference cancels in the
    // residual but the absolute form mirrors how actions are consumed.
    for (int i = 0; i < n; ++i) {
      pose7(current.poses[i], cur7.data());
      for (int c = 0; c < 7; ++c) {
        const double pa = cur7[c] + prow[i * kActionDim + 1 + c];
        const double ga = cur7[c] + grow[i * kActionDim + 1 + c];
        const double r = pa - ga;
        terms.pose += smooth_l1(r, beta);
        if (grad_out) {
          grad_out->at(h, i * kActionDim + 1 + c) +=
              at * weights.lambda_pose * smooth_l1_grad(r, beta) / pose_count;
        }
      }
    }

    // FK consistency term: poses recomputed from the predicted joints.
    const FkResult fk = forward_kinematics_with_jacobian(chain, q_pred);
    for (int j = 0; j < n; ++j) {
      pose7(fk.poses[j], fk7.data());
      pose7(current.poses[j], gt7.data());
      for (int c = 0; c < 7; ++c) gt7[c] += grow[j * kActionDim + 1 + c];
      for (int c = 0; c < 7; ++c) {
        const double r = fk7[c] - gt7[c];
        terms.pose_fk += smooth_l1(r, beta);
        if (grad_out) {
          const double g = at * weights.lambda_pose_fk *
                           smooth_l1_grad(r, beta) / pose_count;
          if (g == 0.0) continue;
          // Chain rule back to every ancestor joint delta.
          for (int i = 0; i < n; ++i) {
            double d;
            if (c < 3) {
              const Vec3& dp = fk.dpos_at(j, i);
              d = c == 0 ? dp.x : (c == 1 ? dp.y : dp.z);
            } else {
              d = fk.dquat_at(j, i)[c - 3];
            }
            if (d != 0.0) grad_out->at(h, i * kActionDim) += g * d;
          }
        }
      }
    }
  }

  terms.joint /= joint_count;
  terms.pose /= pose_count;
  terms.pose_fk /= pose_count;
  terms.total = at * (weights.lambda_joint * terms.joint +
                      weights.lambda_pose * terms.pose +
                      weights.lambda_pose_fk * terms.pose_fk);
  if (!std::isfinite(terms.total)) {
    throw NonFiniteLoss("loss diverged: joint=" + std::to_string(terms.joint) +
                        " pose=" + std::to_string(terms.pose) +
                        " fk=" + std::to_string(terms.pose_fk));
  }
  return terms;
}

std::vector<double> wtm_weights(std::span<const double> errors, const WtmConfig& cfg) {
  if (cfg.candidates < 2 || errors.size() != static_cast<std::size_t>(cfg.candidates)) {
    throw DimensionMismatch("wtm_weights: need N >= 2 candidate errors");
  }
  const std::size_t winner =
      std::min_element(errors.begin(), errors.end()) - errors.begin();
  std::vector<double> weights(errors.size(), cfg.loser_weight());
  weights[winner] = cfg.winner_weight;
  return weights;
}

}  // namespace chunkrt
