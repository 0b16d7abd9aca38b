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

#ifndef CHUNKRT_CHAIN_HPP_
#define CHUNKRT_CHAIN_HPP_

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "chunkrt/geometry.hpp"

namespace chunkrt {

// Gripper joints translate along their axis (openness in meters); they are
// identified by a name pattern at parse time, not by a URDF type.
enum class JointKind { kRevolute, kPrismatic, kFixed, kGripper };

const char* joint_kind_name(JointKind k);

struct Joint {
  std::string name;
  JointKind kind = JointKind::kFixed;
  Vec3 axis{1, 0, 0};  // unit norm for non-fixed joints
  Pose origin;         // child frame relative to parent link frame at q = 0
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  int parent_link = -1;
  int child_link = -1;
};

// Parsed kinematic tree. Joints are stored in a stable topological order
// (parents before descendants, siblings sorted by name).
struct KinematicChain {
  std::string name;
  std::vector<std::string> links;
  std::vector<Joint> joints;
  int root_link = -1;

  std::size_t njoints() const { return joints.size(); }
  std::vector<int> gripper_joints() const;
};

// World pose of every joint's child frame, in chain order.
// Joint position values: radians for revolute, meters for prismatic/gripper,
// ignored for fixed. Throws DimensionMismatch if q.size() != njoints().
std::vector<Pose> forward_kinematics(const KinematicChain& chain,
                                     std::span<const double> q);

// Indices of joints whose position is outside [lower, upper]. Limit
// violations are reported, never rejected.
std::vector<int> limit_violations(const KinematicChain& chain,
                                  std::span<const double> q);

// FK plus analytic derivatives of every joint pose with respect to every
// joint position. Orientation derivative follows dQ/dq_i = 1/2 (w_i) ⊗ Q
// with w_i the joint's world axis.
struct FkResult {
  std::vector<Pose> poses;
  // d position[j] / d q[i] and d quaternion[j] / d q[i], flattened j * n + i.
  std::vector<Vec3> dpos;
  std::vector<std::array<double, 4>> dquat;

  std::size_t n = 0;
  const Vec3& dpos_at(std::size_t j, std::size_t i) const { return dpos[j * n + i]; }
  const std::array<double, 4>& dquat_at(std::size_t j, std::size_t i) const {
    return dquat[j * n + i];
  }
};

FkResult forward_kinematics_with_jacobian(const KinematicChain& chain,
                                          std::span<const double> q);

// Symmetric boolean adjacency: (i, j) set iff joints i and j attach to a
// common link. Diagonal is set.
struct AdjacencyMatrix {
  std::size_t n = 0;
  std::vector<std::uint8_t> cells;  // n * n, row-major
  bool at(std::size_t i, std::size_t j) const { return cells[i * n + j] != 0; }
};

AdjacencyMatrix joint_graph_adjacency(const KinematicChain& chain);

// FNV-1a over the canonical serialized form; used to tie episodes to the
// chain they were recorded with.
std::uint64_t chain_hash(const KinematicChain& chain);

}  // namespace chunkrt

#endif  // CHUNKRT_CHAIN_HPP_
