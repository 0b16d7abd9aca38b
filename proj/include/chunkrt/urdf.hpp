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

#ifndef CHUNKRT_URDF_HPP_
#define CHUNKRT_URDF_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "chunkrt/chain.hpp"

namespace chunkrt {

struct UrdfOptions {
  // Joints whose name contains this substring (case-insensitive) are
  // classified as gripper joints. Empty pattern disables the rule.
  std::string gripper_pattern = "gripper";
};

struct UrdfParseResult {
  KinematicChain chain;
  // Ignored elements and attributes (meshes, dynamics, transmissions, ...).
  std::vector<std::string> warnings;
};

// Supported subset: robot/link names and robot/joint with origin (xyz, rpy),
// axis, limit, parent, child. Everything else lands in the warning list.
// Throws UrdfError on malformed XML, cycles, multiple roots, or joints that
// reference undefined links.
UrdfParseResult parse_urdf(std::string_view xml, const UrdfOptions& opts = {});

UrdfParseResult parse_urdf_file(const std::string& path, const UrdfOptions& opts = {});

// Emits the supported subset; parse(serialize(chain)) reproduces the chain.
std::string serialize_urdf(const KinematicChain& chain);

// Debug summary of a parsed chain as a JSON string.
std::string chain_to_json(const KinematicChain& chain);

}  // namespace chunkrt

#endif  // CHUNKRT_URDF_HPP_
