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

#ifndef CHUNKRT_CAMERA_HPP_
#define CHUNKRT_CAMERA_HPP_

#include <optional>
#include <string>
#include <vector>

#include "chunkrt/chain.hpp"
#include "chunkrt/geometry.hpp"

namespace chunkrt {

struct Episode;  // episode.hpp

// Pinhole camera without distortion. The extrinsic maps base-frame points
// into the camera frame (z forward, x right, y down).
struct CameraModel {
  std::string name = "cam";
  double fx = 0, fy = 0, cx = 0, cy = 0;
  Pose extrinsic;
  int width = 0, height = 0;

  bool operator==(const CameraModel&) const = default;
};

std::string cameras_to_json(const std::vector<CameraModel>& cameras);
std::vector<CameraModel> cameras_from_json(const std::string& json_text);

struct Pixel {
  double u = 0, v = 0;
};

// nullopt when the point lies at or behind the image plane (z <= 1e-9).
std::optional<Pixel> project_point(const CameraModel& cam, const Vec3& p);

std::vector<std::optional<Pixel>> project_joint_poses(const CameraModel& cam,
                                                      const KinematicChain& chain,
                                                      std::span<const double> q);

struct ValidateOptions {
  double threshold_px = 8.0;
  double max_out_of_image_fraction = 0.2;
};

struct ReprojectionReport {
  std::vector<double> per_frame_mean_px;
  std::vector<double> per_camera_mean_px;
  double episode_mean_px = 0.0;
  double episode_max_px = 0.0;
  double out_of_image_fraction = 0.0;
  double threshold_px = 0.0;
  bool pass = false;
};

// Re-projects FK joint poses for every frame and compares them against the
// recorded keypoint annotations. Fails when the episode mean error exceeds
// the threshold or too many projected points fall outside the image.
ReprojectionReport validate_episode(const Episode& episode,
                                    const KinematicChain& chain,
                                    const std::vector<CameraModel>& cameras,
                                    const ValidateOptions& opts = {});

std::string reprojection_report_to_json(const ReprojectionReport& report);

}  // namespace chunkrt

#endif  // CHUNKRT_CAMERA_HPP_
