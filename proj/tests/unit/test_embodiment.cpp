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

#include <random>

#include <doctest.h>

#include "chunkrt/datagen.hpp"
#include "chunkrt/embodiment.hpp"
#include "chunkrt/errors.hpp"
#include "chunkrt/urdf.hpp"

namespace chunkrt {
namespace {

KinematicChain fixture() { return planar_two_link_chain(1.0, 1.0); }

TEST_CASE("masked rows carry -1, unmasked carry the raw scalar") {
  const KinematicChain chain = fixture();
  const RobotState state = RobotState::from_joints(chain, {0.5, -0.3, 0.03});

  // Explicit all-masked.
  const StateEncoding all =
      encode_state(state, std::vector<std::uint8_t>{1, 1, 1});
  CHECK(all.rows.at(0, 0) == -1.0);
  CHECK(all.rows.at(1, 0) == -1.0);
  CHECK(all.rows.at(2, 0) == -1.0);

  // Default mask leaves the gripper openness visible.
  const auto mask = default_state_mask(chain);
  REQUIRE(mask.size() == 3);
  CHECK(mask[0] == 1);
  CHECK(mask[2] == 0);
  const StateEncoding enc = encode_state(state, mask);
  CHECK(enc.rows.at(0, 0) == -1.0);
  CHECK(enc.rows.at(2, 0) == doctest::Approx(0.03));
}

TEST_CASE("encoding rows carry fk poses") {
  const KinematicChain chain = fixture();
  const RobotState state = RobotState::from_joints(chain, {0.0, 0.0, 0.0});
  const StateEncoding enc = encode_state(state, default_state_mask(chain));
  // Elbow frame at (1,0,0), tip at (2,0,0) for unit links at zero config.
  CHECK(enc.rows.at(1, 1) == doctest::Approx(1.0));
  CHECK(enc.rows.at(2, 1) == doctest::Approx(2.0));
  CHECK(enc.rows.at(0, 4) == doctest::Approx(1.0));  // identity quaternion w
  // Quaternion part is unit-norm.
  for (int i = 0; i < 3; ++i) {
    const double n = std::sqrt(enc.rows.at(i, 4) * enc.rows.at(i, 4) +
                               enc.rows.at(i, 5) * enc.rows.at(i, 5) +
                               enc.rows.at(i, 6) * enc.rows.at(i, 6) +
                               enc.rows.at(i, 7) * enc.rows.at(i, 7));
    CHECK(n == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("masking property holds for random masks") {
  const KinematicChain chain = fixture();
  const RobotState state = RobotState::from_joints(chain, {0.2, 0.4, 0.01});
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<std::uint8_t> mask(3);
    for (auto& m : mask) m = rng() & 1;
    const StateEncoding enc = encode_state(state, mask);
    for (int i = 0; i < 3; ++i) {
      if (mask[i]) {
        CHECK(enc.rows.at(i, 0) == -1.0);
      } else {
        CHECK(enc.rows.at(i, 0) == doctest::Approx(state.q[i]));
      }
    }
  }
}

TEST_CASE("relative action of a state with itself is zero") {
  const KinematicChain chain = fixture();
  const RobotState state = RobotState::from_joints(chain, {0.3, -0.7, 0.02});
  for (double v : relative_action(state, state)) CHECK(v == 0.0);
}

TEST_CASE("relative action matches fk differences") {
  const KinematicChain chain = fixture();
  const RobotState a = RobotState::from_joints(chain, {0.1, 0.5, 0.0});
  const RobotState b = RobotState::from_joints(chain, {0.3, 0.5, 0.0});
  const HybridAction action = relative_action(a, b);
  CHECK(action[0] == doctest::Approx(0.2));
  CHECK(action[8] == doctest::Approx(0.0));
  // Elbow position delta equals the fk difference.
  const Vec3 dp = b.poses[1].position - a.poses[1].position;
  CHECK(action[1 * kActionDim + 1] == doctest::Approx(dp.x));
  CHECK(action[1 * kActionDim + 2] == doctest::Approx(dp.y));
}

TEST_CASE("hemisphere alignment kills antipodal quaternion deltas") {
  const KinematicChain chain = fixture();
  const RobotState a = RobotState::from_joints(chain, {0.4, 0.2, 0.0});
  RobotState b = a;
  for (Pose& p : b.poses) {
    p.orientation = {-p.orientation.w, -p.orientation.x, -p.orientation.y,
                     -p.orientation.z};
  }
  const HybridAction action = relative_action(a, b);
  for (double v : action) CHECK(v == doctest::Approx(0.0));

  // And negating the target changes nothing.
  const HybridAction plain = relative_action(a, a);
  const HybridAction flipped = relative_action(a, b);
  for (std::size_t i = 0; i < plain.size(); ++i) {
    CHECK(plain[i] == doctest::Approx(flipped[i]));
  }
}

TEST_CASE("zero action is the identity in both modes") {
  const KinematicChain chain = fixture();
  const RobotState state = RobotState::from_joints(chain, {0.3, 0.9, 0.01});
  const HybridAction zero(chain.njoints() * kActionDim, 0.0);

  const RobotState joint = apply_action(chain, state, zero, ControlMode::kJointSpace);
  for (std::size_t i = 0; i < state.q.size(); ++i) {
    CHECK(joint.q[i] == doctest::Approx(state.q[i]));
  }
  const RobotState ee = apply_action(chain, state, zero, ControlMode::kEeSpace);
  CHECK(ee.joints_stale);
  for (std::size_t i = 0; i < state.poses.size(); ++i) {
    CHECK((ee.poses[i].position - state.poses[i].position).norm() < 1e-12);
  }
}

TEST_CASE("joint-space application recomputes poses by fk") {
  const KinematicChain chain = fixture();
  const RobotState state = RobotState::from_joints(chain, {0.0, 0.0, 0.0});
  HybridAction action(chain.njoints() * kActionDim, 0.0);
  action[0] = 0.1;
  const RobotState next = apply_action(chain, state, action, ControlMode::kJointSpace);
  CHECK(next.q[0] == doctest::Approx(0.1));
  const std::vector<Pose> expect = forward_kinematics(chain, next.q);
  CHECK((next.poses[2].position - expect[2].position).norm() < 1e-12);
  CHECK_FALSE(next.joints_stale);
}

TEST_CASE("a quaternion delta that cancels the orientation is degenerate") {
  const KinematicChain chain = fixture();
  const RobotState state = RobotState::from_joints(chain, {0.3, 0.4, 0.0});
  HybridAction action(chain.njoints() * kActionDim, 0.0);
  for (std::size_t i = 0; i < chain.njoints(); ++i) {
    const Quat& q = state.poses[i].orientation;
    action[i * kActionDim + 4] = -q.w;
    action[i * kActionDim + 5] = -q.x;
    action[i * kActionDim + 6] = -q.y;
    action[i * kActionDim + 7] = -q.z;
  }
  CHECK_THROWS_AS(apply_action(chain, state, action, ControlMode::kEeSpace),
                  DegenerateQuaternion);
}

TEST_CASE("round trip: apply(relative(a, b)) reproduces b") {
  const KinematicChain chain = fixture();
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> angle(-2.0, 2.0);
  for (int rep = 0; rep < 100; ++rep) {
    const RobotState a =
        RobotState::from_joints(chain, {angle(rng), angle(rng), 0.01});
    const RobotState b =
        RobotState::from_joints(chain, {angle(rng), angle(rng), 0.02});
    const RobotState back =
        apply_action(chain, a, relative_action(a, b), ControlMode::kJointSpace);
    for (std::size_t i = 0; i < b.q.size(); ++i) {
      CHECK(back.q[i] == doctest::Approx(b.q[i]).epsilon(1e-12));
    }
    for (std::size_t i = 0; i < b.poses.size(); ++i) {
      CHECK((back.poses[i].position - b.poses[i].position).norm() < 1e-9);
    }
  }
}

TEST_CASE("chunks apply every step against the same reference") {
  const KinematicChain chain = fixture();
  const RobotState ref = RobotState::from_joints(chain, {0.5, 0.2, 0.0});

  ActionChunk chunk = zero_chunk(chain, ref, 8);
  const std::vector<RobotState> all_zero =
      chunk_to_absolute(chain, chunk, ControlMode::kJointSpace);
  REQUIRE(all_zero.size() == 8);
  for (const RobotState& s : all_zero) {
    CHECK(s.q[0] == doctest::Approx(ref.q[0]));
  }

  // Linear ramp: q_t = q0 + 0.01 * (t + 1); steps are not chained.
  for (int t = 0; t < chunk.deltas.rows; ++t) {
    chunk.deltas.at(t, 0) = 0.01 * (t + 1);
  }
  const std::vector<RobotState> ramp =
      chunk_to_absolute(chain, chunk, ControlMode::kJointSpace);
  for (int t = 0; t < 8; ++t) {
    CHECK(ramp[t].q[0] == doctest::Approx(ref.q[0] + 0.01 * (t + 1)));
  }

  // A single-step chunk is exactly apply_action.
  ActionChunk one = zero_chunk(chain, ref, 1);
  one.deltas.at(0, 0) = 0.2;
  const RobotState direct =
      apply_action(chain, ref, one.deltas.row(0), ControlMode::kJointSpace);
  const std::vector<RobotState> via_chunk =
      chunk_to_absolute(chain, one, ControlMode::kJointSpace);
  CHECK(via_chunk[0].q[0] == doctest::Approx(direct.q[0]));
}

TEST_CASE("dimension mismatches are rejected") {
  const KinematicChain chain = fixture();
  const RobotState state = RobotState::from_joints(chain, {0.0, 0.0, 0.0});
  CHECK_THROWS_AS(apply_action(chain, state, std::vector<double>(5, 0.0),
                               ControlMode::kJointSpace),
                  DimensionMismatch);
  CHECK_THROWS_AS(encode_state(state, std::vector<std::uint8_t>{1}),
                  DimensionMismatch);
}

}  // namespace
}  // namespace chunkrt
