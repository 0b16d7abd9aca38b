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

#include "chunkrt/chain.hpp"

#include <string>

#include "chunkrt/errors.hpp"
#include "chunkrt/urdf.hpp"

namespace chunkrt {

const char* joint_kind_name(JointKind k) {
  switch (k) {
    case JointKind::kRevolute: return "revolute";
    case JointKind::kPrismatic: return "prismatic";
    case JointKind::kFixed: return "fixed";
    case JointKind::kGripper: return "gripper";
  }
  return "unknown";
}

std::vector<int> KinematicChain::gripper_joints() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < joints.size(); ++i) {
    if (joints[i].kind == JointKind::kGripper) out.push_back(static_cast<int>(i));
  }
  return out;
}

namespace {

void check_dimensions(const KinematicChain& chain, std::span<const double> q) {
  if (q.size() != chain.njoints()) {
    throw DimensionMismatch("joint vector length " + std::to_string(q.size()) +
                            " does not match joint count " +
                            std::to_string(chain.njoints()));
  }
}

Pose joint_motion(const Joint& joint, double q) {
  switch (joint.kind) {
    case JointKind::kRevolute:
      return Pose{{0, 0, 0}, Quat::from_axis_angle(joint.axis, q)};
    case JointKind::kPrismatic:
    case JointKind::kGripper:
      return Pose{joint.axis * q, Quat::identity()};
    case JointKind::kFixed:
      return Pose::identity();
  }
  return Pose::identity();
}

}  // namespace

std::vector<Pose> forward_kinematics(const KinematicChain& chain,
                                     std::span<const double> q) {
  check_dimensions(chain, q);
  // Joints are in topological order, so the parent link pose is always
  // resolved before any joint hanging off it.
  std::vector<Pose> link_pose(chain.links.size(), Pose::identity());
  std::vector<Pose> out(chain.njoints());
  for (std::size_t i = 0; i < chain.joints.size(); ++i) {
    const Joint& joint = chain.joints[i];
    const Pose frame = compose(compose(link_pose[joint.parent_link], joint.origin),
                               joint_motion(joint, q[i]));
    link_pose[joint.child_link] = frame;
    out[i] = frame;
  }
  return out;
}

std::vector<int> limit_violations(const KinematicChain& chain,
                                  std::span<const double> q) {
  check_dimensions(chain, q);
  std::vector<int> out;
  for (std::size_t i = 0; i < chain.joints.size(); ++i) {
    if (chain.joints[i].kind == JointKind::kFixed) continue;
    if (q[i] < chain.joints[i].lower || q[i] > chain.joints[i].upper) {
      out.push_back(static_cast<int>(i));
    }
  }
  return out;
}

FkResult forward_kinematics_with_jacobian(const KinematicChain& chain,
                                          std::span<const double> q) {
  const std::size_t n = chain.njoints();
  FkResult res;
  res.n = n;
  res.poses = forward_kinematics(chain, q);
  res.dpos.assign(n * n, Vec3{});
  res.dquat.assign(n * n, {0, 0, 0, 0});

  // Ancestor joint list per joint, following child_link -> parent joint up
  // to the root.
  std::vector<int> parent_joint_of_link(chain.links.size(), -1);
  for (std::size_t i = 0; i < n; ++i) {
    parent_joint_of_link[chain.joints[i].child_link] = static_cast<int>(i);
  }

  for (std::size_t j = 0; j < n; ++j) {
    int i = static_cast<int>(j);
    while (i >= 0) {
      const Joint& joint = chain.joints[i];
      if (joint.kind == JointKind::kRevolute) {
        // World axis passes through the joint frame; rotating q_i sweeps
        // everything downstream around it.
        const Pose& frame = res.poses[i];
        const Vec3 world_axis = frame.orientation.rotate(joint.axis);
        res.dpos[j * n + i] =
            world_axis.cross(res.poses[j].position - frame.position);
        const Quat& quat = res.poses[j].orientation;
        const Quat omega{0, world_axis.x, world_axis.y, world_axis.z};
        const Quat dq = omega * quat;
        res.dquat[j * n + i] = {0.5 * dq.w, 0.5 * dq.x, 0.5 * dq.y, 0.5 * dq.z};
      } else if (joint.kind == JointKind::kPrismatic ||
                 joint.kind == JointKind::kGripper) {
        // Sliding adds no rotation, so the joint frame orientation already
        // carries the parent rotation and the world axis falls out directly.
        const Vec3 world_axis = res.poses[i].orientation.rotate(joint.axis);
        res.dpos[j * n + i] = world_axis;
      }
      i = parent_joint_of_link[joint.parent_link];
    }
  }
  return res;
}

AdjacencyMatrix joint_graph_adjacency(const KinematicChain& chain) {
  const std::size_t n = chain.njoints();
  AdjacencyMatrix adj;
  adj.n = n;
  adj.cells.assign(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Joint& a = chain.joints[i];
      const Joint& b = chain.joints[j];
      const bool share = i == j || a.parent_link == b.parent_link ||
                         a.parent_link == b.child_link ||
                         a.child_link == b.parent_link ||
                         a.child_link == b.child_link;
      adj.cells[i * n + j] = share ? 1 : 0;
    }
  }
  return adj;
}

std::uint64_t chain_hash(const KinematicChain& chain) {
  const std::string canon = serialize_urdf(chain);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace chunkrt
