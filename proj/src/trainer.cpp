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

#include "chunkrt/trainer.hpp"

#include <cmath>
#include <string>

#include "chunkrt/errors.hpp"

namespace chunkrt {

FrozenCandidates make_candidates(const Matrix& gt, const NoiseSchedule& sched,
                                 const TeacherForcingConfig& tf, int candidates,
                                 std::mt19937_64& rng) {
  FrozenCandidates out;
  std::uniform_int_distribution<int> tau_dist(0, sched.steps - 1);
  out.tau = tau_dist(rng);
  out.noisy.reserve(candidates);
  for (int k = 0; k < candidates; ++k) {
    const Matrix eps = randn_matrix(gt.rows, gt.cols, rng);
    Matrix x = add_noise(sched, gt, eps, out.tau);
    out.noisy.push_back(teacher_forced_input(x, gt, tf, rng).chunk);
  }
  return out;
}

double sample_loss_and_grad(const ToyDenoiser& model, const KinematicChain& chain,
                            const TrainSample& sample, const FrozenCandidates& frozen,
                            const LossWeights& weights, const WtmConfig& wtm,
                            bool wtm_enabled, std::vector<double>* grad,
                            double scale) {
  const int n_cand = static_cast<int>(frozen.noisy.size());
  std::vector<ToyDenoiser::Workspace> workspaces(grad ? n_cand : 1);
  std::vector<Matrix> grads_pred(grad ? n_cand : 0);
  std::vector<double> losses(n_cand);

  Matrix pred(model.shape().horizon, model.shape().action_dim);
  for (int k = 0; k < n_cand; ++k) {
    ToyDenoiser::Workspace& ws = workspaces[grad ? k : 0];
    model.build_input(frozen.noisy[k], sample.obs, frozen.tau, ws.input);
    model.forward(ws);
    std::copy(ws.y.begin(), ws.y.end(), pred.data.begin());
    const LossTerms terms =
        compute_losses(pred, sample.gt, sample.current, chain, frozen.tau, weights,
                       grad ? &grads_pred[k] : nullptr);
    losses[k] = terms.total;
  }

  std::vector<double> cand_weights(n_cand, 1.0);
  if (wtm_enabled && n_cand >= 2) cand_weights = wtm_weights(losses, wtm);

  double total = 0.0;
  for (int k = 0; k < n_cand; ++k) total += cand_weights[k] * losses[k];
  total /= n_cand;

  if (grad) {
    for (int k = 0; k < n_cand; ++k) {
      model.backward(workspaces[k], grads_pred[k].data,
                     cand_weights[k] / n_cand * scale, *grad);
    }
  }
  return total;
}

Trainer::Trainer(ToyDenoiser& model, const KinematicChain& chain,
                 NoiseSchedule schedule, TrainerConfig cfg)
    : model_(model),
      chain_(chain),
      schedule_(std::move(schedule)),
      cfg_(cfg),
      velocity_(model.param_count(), 0.0),
      grad_(model.param_count(), 0.0),
      rng_(cfg.seed) {}

double Trainer::step(std::span<const TrainSample> batch) {
  if (batch.empty()) throw DimensionMismatch("empty training batch");
  // Candidates are drawn either way; disabling WTM only flattens the weights,
  // which keeps the two trainings compute-matched.
  std::fill(grad_.begin(), grad_.end(), 0.0);
  const int n_cand = cfg_.wtm.candidates;

  double loss = 0.0;
  for (const TrainSample& sample : batch) {
    const FrozenCandidates frozen =
        make_candidates(sample.gt, schedule_, cfg_.tf, n_cand, rng_);
    loss += sample_loss_and_grad(model_, chain_, sample, frozen, cfg_.weights,
                                 cfg_.wtm, cfg_.wtm_enabled, &grad_,
                                 1.0 / static_cast<double>(batch.size()));
  }
  loss /= static_cast<double>(batch.size());
  if (!std::isfinite(loss)) {
    throw NonFiniteLoss("batch loss is not finite at step " +
                        std::to_string(steps_taken_));
  }

  if (cfg_.max_grad_norm > 0.0) {
    double norm_sq = 0.0;
    for (double g : grad_) norm_sq += g * g;
    const double norm = std::sqrt(norm_sq);
    if (norm > cfg_.max_grad_norm) {
      const double scale = cfg_.max_grad_norm / norm;
      for (double& g : grad_) g *= scale;
    }
  }

  double lr = cfg_.lr;
  if (cfg_.steps > 0 &&
      steps_taken_ >= static_cast<int>(cfg_.lr_decay_at * cfg_.steps)) {
    lr *= cfg_.lr_decay_factor;
  }
  std::vector<double>& params = model_.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    velocity_[i] = cfg_.momentum * velocity_[i] - lr * grad_[i];
    params[i] += velocity_[i];
  }
  ++steps_taken_;
  if (!model_.finite()) {
    throw NonFiniteLoss("parameters diverged at step " + std::to_string(steps_taken_) +
                        " (lr=" + std::to_string(lr) + ")");
  }
  return loss;
}

double finite_diff_check(ToyDenoiser& model, const KinematicChain& chain,
                         const TrainSample& sample, const FrozenCandidates& frozen,
                         const LossWeights& weights, const WtmConfig& wtm,
                         bool wtm_enabled, int count, double h, std::mt19937_64& rng) {
  std::vector<double> grad(model.param_count(), 0.0);
  sample_loss_and_grad(model, chain, sample, frozen, weights, wtm, wtm_enabled, &grad);

  std::uniform_int_distribution<std::size_t> pick(0, model.param_count() - 1);
  double max_rel = 0.0;
  std::vector<double>& params = model.params();
  for (int c = 0; c < count; ++c) {
    const std::size_t idx = pick(rng);
    const double saved = params[idx];
    params[idx] = saved + h;
    const double lp = sample_loss_and_grad(model, chain, sample, frozen, weights,
                                           wtm, wtm_enabled, nullptr);
    params[idx] = saved - h;
    const double lm = sample_loss_and_grad(model, chain, sample, frozen, weights,
                                           wtm, wtm_enabled, nullptr);
    params[idx] = saved;
    const double fd = (lp - lm) / (2.0 * h);
    const double rel =
        std::abs(grad[idx] - fd) / std::max(1e-8, std::abs(grad[idx]) + std::abs(fd));
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

}  // namespace chunkrt
