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

#ifndef CHUNKRT_EMBODIMENT_HPP_
#define CHUNKRT_EMBODIMENT_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "chunkrt/chain.hpp"
#include "chunkrt/matrix.hpp"

namespace chunkrt {

// Per-joint action layout: [dtheta, dx, dy, dz, dqw, dqx, dqy, dqz].
inline constexpr int kActionDim = 8;

// Proprioceptive snapshot: joint positions plus base-frame joint poses.
struct RobotState {
  std::vector<double> q;
  std::vector<Pose> poses;
  std::int64_t timestamp_ns = 0;
  // Set after a Cartesian-space update; q no longer matches poses.
  bool joints_stale = false;

  static RobotState from_joints(const KinematicChain& chain,
                                std::vector<double> q,
                                std::int64_t timestamp_ns = 0);
};

// Per-joint 8-wide rows: [scalar | x, y, z, qw, qx, qy, qz]. Masked rows
// carry -1 in the scalar slot.
struct StateEncoding {
  Matrix rows;
  std::vector<std::uint8_t> mask;
};

// All joints masked except grippers, whose openness stays visible.
std::vector<std::uint8_t> default_state_mask(const KinematicChain& chain);

StateEncoding encode_state(const RobotState& state,
                           std::span<const std::uint8_t> mask);

enum class ControlMode { kJointSpace, kEeSpace };

// How orientation deltas are represented. Componentwise quaternion
// differences are the implemented semantics; the relative-rotation variant
// is reserved in the configuration surface but not built.
enum class QuatDeltaMode { kComponentwise, kRelativeRotation };

// Flattened hybrid action: njoints * kActionDim values.
using HybridAction = std::vector<double>;

// Componentwise deltas from current to target, with target quaternions
// flipped onto current's hemisphere first.
HybridAction relative_action(const RobotState& current, const RobotState& target);

// Joint-space mode integrates dtheta and recomputes poses with FK. EE-space
// mode adds the Cartesian deltas, renormalizes quaternions, and leaves the
// joint vector untouched but marked stale.
RobotState apply_action(const KinematicChain& chain, const RobotState& current,
                        std::span<const double> action, ControlMode mode);

// A horizon of hybrid actions, every step relative to the same reference.
struct ActionChunk {
  Matrix deltas;  // horizon x (njoints * kActionDim)
  RobotState reference;

  int horizon() const { return deltas.rows; }
};

ActionChunk zero_chunk(const KinematicChain& chain, const RobotState& reference,
                       int horizon);

// Applies every step independently to the chunk reference (not cumulatively).
std::vector<RobotState> chunk_to_absolute(const KinematicChain& chain,
                                          const ActionChunk& chunk,
                                          ControlMode mode);

}  // namespace chunkrt

#endif  // CHUNKRT_EMBODIMENT_HPP_
