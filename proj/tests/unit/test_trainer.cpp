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

#include <filesystem>

#include <doctest.h>

#include "chunkrt/datagen.hpp"
#include "chunkrt/errors.hpp"
#include "chunkrt/trainer.hpp"

namespace chunkrt {
namespace {

struct TrainFixture {
  KinematicChain chain = planar_two_link_chain(0.3, 0.2);
  int horizon = 6;
  ToyDenoiser::Shape shape;
  TrainSample sample;

  TrainFixture() {
    shape.horizon = horizon;
    shape.action_dim = static_cast<int>(chain.njoints()) * kActionDim;
    shape.obs_dim = 5;
    shape.temb_dim = 8;
    shape.hidden = 24;

    const RobotState current = RobotState::from_joints(chain, {0.2, 0.6, 0.01});
    sample.current = current;
    sample.obs = {0.2, 0.6, 0.01, 0.3, 0.1};
    sample.gt = Matrix(horizon, shape.action_dim);
    for (int t = 0; t < horizon; ++t) {
      const RobotState target = RobotState::from_joints(
          chain, {0.2 + 0.03 * (t + 1), 0.6 - 0.02 * (t + 1), 0.01});
      const HybridAction deltas = relative_action(current, target);
      std::copy(deltas.begin(), deltas.end(), sample.gt.row(t).begin());
    }
  }
};

TEST_CASE("timestep embedding is bounded and distinguishes steps") {
  std::vector<double> a(16), b(16);
  timestep_embedding(3, a);
  timestep_embedding(700, b);
  double diff = 0.0;
  for (int i = 0; i < 16; ++i) {
    CHECK(std::abs(a[i]) <= 1.0);
    diff += std::abs(a[i] - b[i]);
  }
  CHECK(diff > 0.1);
}

TEST_CASE("denoiser output shape matches the chunk for all timesteps") {
  const TrainFixture fx;
  const ToyDenoiser model(fx.shape, 42);
  std::mt19937_64 rng(1);
  const Matrix x = randn_matrix(fx.horizon, fx.shape.action_dim, rng);
  for (int tau : {0, 500, 999}) {
    const Matrix y = model.denoise(x, fx.sample.obs, tau);
    CHECK(y.rows == x.rows);
    CHECK(y.cols == x.cols);
  }
  CHECK_THROWS_AS(model.denoise(randn_matrix(2, 3, rng), fx.sample.obs, 0),
                  ShapeMismatch);
}

TEST_CASE("model round-trips through the file format") {
  const TrainFixture fx;
  ToyDenoiser model(fx.shape, 7);
  const std::string path = "/tmp/chunkrt_model_test.bin";
  model.save(path);
  const ToyDenoiser loaded = ToyDenoiser::load(path, fx.shape);
  CHECK(loaded.params() == model.params());

  // Wrong shape is rejected.
  ToyDenoiser::Shape other = fx.shape;
  other.hidden = 16;
  CHECK_THROWS_AS(ToyDenoiser::load(path, other), FormatVersionMismatch);

  ModelMeta meta;
  meta.horizon = fx.shape.horizon;
  meta.njoints = 3;
  meta.obs_dim = fx.shape.obs_dim;
  meta.temb_dim = fx.shape.temb_dim;
  meta.hidden = fx.shape.hidden;
  write_model_meta(path + ".json", meta);
  const ModelMeta back = read_model_meta(path + ".json");
  CHECK(back.horizon == meta.horizon);
  CHECK(back.hidden == meta.hidden);
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".json");
}

TEST_CASE("finite differences confirm the hand-derived gradients") {
  const TrainFixture fx;
  const NoiseSchedule sched = build_cosine_schedule(1000);
  std::mt19937_64 rng(11);

  ToyDenoiser model(fx.shape, 3);
  TeacherForcingConfig tf;
  tf.ratio = 0.5;
  const FrozenCandidates frozen = make_candidates(fx.sample.gt, sched, tf, 4, rng);

  const double err = finite_diff_check(model, fx.chain, fx.sample, frozen, {}, {},
                                       true, 250, 1e-5, rng);
  CHECK(err < 1e-4);
}

TEST_CASE("identity activation makes the model linear and gradients exact") {
  TrainFixture fx;
  fx.shape.activation = ToyDenoiser::Activation::kIdentity;
  const NoiseSchedule sched = build_cosine_schedule(1000);
  std::mt19937_64 rng(13);
  ToyDenoiser model(fx.shape, 5);
  FrozenCandidates frozen;
  frozen.tau = 400;
  for (int k = 0; k < 2; ++k) {
    frozen.noisy.push_back(
        add_noise(sched, fx.sample.gt,
                  randn_matrix(fx.sample.gt.rows, fx.sample.gt.cols, rng), 400));
  }
  // Without the fk term the loss is piecewise quadratic in each parameter,
  // so central differences are exact up to rounding.
  LossWeights weights;
  weights.lambda_pose_fk = 0.0;
  const double err = finite_diff_check(model, fx.chain, fx.sample, frozen, weights,
                                       WtmConfig{2, 2.0}, true, 150, 1e-5, rng);
  CHECK(err < 1e-7);
}

TEST_CASE("zero learning rate leaves parameters untouched") {
  const TrainFixture fx;
  ToyDenoiser model(fx.shape, 9);
  const std::vector<double> before = model.params();
  TrainerConfig cfg;
  cfg.lr = 0.0;
  cfg.momentum = 0.0;
  cfg.steps = 10;
  cfg.wtm.candidates = 2;
  Trainer trainer(model, fx.chain, build_cosine_schedule(1000), cfg);
  const double loss = trainer.step(std::vector<TrainSample>{fx.sample});
  CHECK(std::isfinite(loss));
  CHECK(model.params() == before);
}

TEST_CASE("training overfits a single sample") {
  const TrainFixture fx;
  const NoiseSchedule sched = build_cosine_schedule(1000);
  ToyDenoiser model(fx.shape, 21);
  TrainerConfig cfg;
  cfg.lr = 2e-3;
  cfg.momentum = 0.9;
  cfg.steps = 2000;
  cfg.batch = 1;
  cfg.tf.ratio = 0.0;
  cfg.wtm.candidates = 4;
  cfg.seed = 2;
  Trainer trainer(model, fx.chain, sched, cfg);
  const std::vector<TrainSample> batch{fx.sample};

  // Per-step losses mix timestep weights spanning 1..1000, so progress is
  // measured on a frozen evaluation batch instead.
  std::mt19937_64 eval_rng(77);
  FrozenCandidates eval;
  eval.tau = 50;
  for (int k = 0; k < 4; ++k) {
    eval.noisy.push_back(add_noise(
        sched, fx.sample.gt,
        randn_matrix(fx.sample.gt.rows, fx.sample.gt.cols, eval_rng), eval.tau));
  }
  auto eval_loss = [&] {
    return sample_loss_and_grad(model, fx.chain, fx.sample, eval, {}, {}, false,
                                nullptr);
  };
  const double before = eval_loss();
  for (int step = 0; step < cfg.steps; ++step) trainer.step(batch);
  CHECK(eval_loss() < before / 100.0);
}

TEST_CASE("after training the gradients still check out") {
  const TrainFixture fx;
  ToyDenoiser model(fx.shape, 33);
  TrainerConfig cfg;
  cfg.lr = 1e-3;
  cfg.steps = 1000;
  cfg.batch = 1;
  cfg.wtm.candidates = 2;
  Trainer trainer(model, fx.chain, build_cosine_schedule(1000), cfg);
  const std::vector<TrainSample> batch{fx.sample};
  for (int step = 0; step < cfg.steps; ++step) trainer.step(batch);

  std::mt19937_64 rng(17);
  const FrozenCandidates frozen =
      make_candidates(fx.sample.gt, build_cosine_schedule(1000), {}, 4, rng);
  const double err = finite_diff_check(model, fx.chain, fx.sample, frozen, {}, {},
                                       true, 200, 1e-5, rng);
  CHECK(err < 1e-4);
}

TEST_CASE("non-finite parameters abort with diagnostics") {
  // With the identity activation nothing saturates, so an absurd learning
  // rate overflows within a handful of steps.
  TrainFixture fx;
  fx.shape.activation = ToyDenoiser::Activation::kIdentity;
  ToyDenoiser model(fx.shape, 1);
  TrainerConfig cfg;
  cfg.lr = 1e9;  // guaranteed blow-up
  cfg.max_grad_norm = 0.0;
  cfg.steps = 50;
  cfg.batch = 1;
  cfg.wtm.candidates = 2;
  Trainer trainer(model, fx.chain, build_cosine_schedule(1000), cfg);
  const std::vector<TrainSample> batch{fx.sample};
  CHECK_THROWS_AS(
      [&] {
        for (int i = 0; i < 50; ++i) trainer.step(batch);
      }(),
      NonFiniteLoss);
}

}  // namespace
}  // namespace chunkrt
