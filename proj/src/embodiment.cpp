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

#include "chunkrt/embodiment.hpp"

#include <cmath>
#include <string>

#include "chunkrt/errors.hpp"

namespace chunkrt {

RobotState RobotState::from_joints(const KinematicChain& chain,
                                   std::vector<double> q,
                                   std::int64_t timestamp_ns) {
  RobotState s;
  s.poses = forward_kinematics(chain, q);
  s.q = std::move(q);
  s.timestamp_ns = timestamp_ns;
  return s;
}

std::vector<std::uint8_t> default_state_mask(const KinematicChain& chain) {
  std::vector<std::uint8_t> mask(chain.njoints(), 1);
  for (int g : chain.gripper_joints()) mask[g] = 0;
  return mask;
}

StateEncoding encode_state(const RobotState& state,
                           std::span<const std::uint8_t> mask) {
  const std::size_t n = state.q.size();
  if (mask.size() != n || state.poses.size() != n) {
    throw DimensionMismatch("state encoding: mask/poses/q sizes disagree");
  }
  StateEncoding enc;
  enc.rows = Matrix(static_cast<int>(n), kActionDim);
  enc.mask.assign(mask.begin(), mask.end());
  for (std::size_t i = 0; i < n; ++i) {
    auto row = enc.rows.row(static_cast<int>(i));
    row[0] = mask[i] ? -1.0 : state.q[i];
    const Pose& pose = state.poses[i];
    row[1] = pose.position.x;
    row[2] = pose.position.y;
    row[3] = pose.position.z;
    row[4] = pose.orientation.w;
    row[5] = pose.orientation.x;
    row[6] = pose.orientation.y;
    row[7] = pose.orientation.z;
  }
  return enc;
}

HybridAction relative_action(const RobotState& current, const RobotState& target) {
  const std::size_t n = current.q.size();
  if (target.q.size() != n || current.poses.size() != n || target.poses.size() != n) {
    throw DimensionMismatch("relative_action: state sizes disagree");
  }
  HybridAction action(n * kActionDim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = action.data() + i * kActionDim;
    row[0] = target.q[i] - current.q[i];
    const Vec3 dp = target.poses[i].position - current.poses[i].position;
    row[1] = dp.x;
    row[2] = dp.y;
    row[3] = dp.z;
    Quat qt = target.poses[i].orientation;
    const Quat& qc = current.poses[i].orientation;
    if (qt.dot(qc) < 0.0) qt = {-qt.w, -qt.x, -qt.y, -qt.z};
    row[4] = qt.w - qc.w;
    row[5] = qt.x - qc.x;
    row[6] = qt.y - qc.y;
    row[7] = qt.z - qc.z;
  }
  return action;
}

RobotState apply_action(const KinematicChain& chain, const RobotState& current,
                        std::span<const double> action, ControlMode mode) {
  const std::size_t n = chain.njoints();
  if (current.q.size() != n || action.size() != n * kActionDim) {
    throw DimensionMismatch("apply_action: expected " +
                            std::to_string(n * kActionDim) + " action values, got " +
                            std::to_string(action.size()));
  }
  RobotState out;
  out.timestamp_ns = current.timestamp_ns;
  if (mode == ControlMode::kJointSpace) {
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = current.q[i] + action[i * kActionDim];
    return RobotState::from_joints(chain, std::move(q), current.timestamp_ns);
  }
  // EE-space: integrate the Cartesian columns, leave q frozen.
  out.q = current.q;
  out.joints_stale = true;
  out.poses.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = action.data() + i * kActionDim;
    Pose pose = current.poses[i];
    pose.position = pose.position + Vec3{row[1], row[2], row[3]};
    Quat q{pose.orientation.w + row[4], pose.orientation.x + row[5],
           pose.orientation.y + row[6], pose.orientation.z + row[7]};
    if (q.norm() < 1e-6) {
      throw DegenerateQuaternion("joint " + std::to_string(i) +
                                 ": quaternion update collapses to zero");
    }
    pose.orientation = q.normalized();
    out.poses[i] = pose;
  }
  return out;
}

ActionChunk zero_chunk(const KinematicChain& chain, const RobotState& reference,
                       int horizon) {
  ActionChunk chunk;
  chunk.deltas = Matrix(horizon, static_cast<int>(chain.njoints()) * kActionDim);
  chunk.reference = reference;
  return chunk;
}

std::vector<RobotState> chunk_to_absolute(const KinematicChain& chain,
                                          const ActionChunk& chunk,
                                          ControlMode mode) {
  std::vector<RobotState> out;
  out.reserve(chunk.horizon());
  for (int t = 0; t < chunk.horizon(); ++t) {
    out.push_back(apply_action(chain, chunk.reference, chunk.deltas.row(t), mode));
  }
  return out;
}

}  // namespace chunkrt
