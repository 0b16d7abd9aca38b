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

#include "chunkrt/camera.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "chunkrt/episode.hpp"
#include "chunkrt/errors.hpp"

namespace chunkrt {

namespace {

nlohmann::json camera_to_json_obj(const CameraModel& cam) {
  return nlohmann::json{
      {"name", cam.name},
      {"fx", cam.fx},
      {"fy", cam.fy},
      {"cx", cam.cx},
      {"cy", cam.cy},
      {"width", cam.width},
      {"height", cam.height},
      {"extrinsic",
       {{"position",
         {cam.extrinsic.position.x, cam.extrinsic.position.y, cam.extrinsic.position.z}},
        {"orientation",
         {cam.extrinsic.orientation.w, cam.extrinsic.orientation.x,
          cam.extrinsic.orientation.y, cam.extrinsic.orientation.z}}}}};
}

CameraModel camera_from_json_obj(const nlohmann::json& j) {
  CameraModel cam;
  cam.name = j.value("name", "cam");
  cam.fx = j.at("fx").get<double>();
  cam.fy = j.at("fy").get<double>();
  cam.cx = j.at("cx").get<double>();
  cam.cy = j.at("cy").get<double>();
  cam.width = j.at("width").get<int>();
  cam.height = j.at("height").get<int>();
  const auto& ext = j.at("extrinsic");
  const auto& pos = ext.at("position");
  const auto& ori = ext.at("orientation");
  cam.extrinsic.position = {pos.at(0).get<double>(), pos.at(1).get<double>(),
                            pos.at(2).get<double>()};
  cam.extrinsic.orientation = {ori.at(0).get<double>(), ori.at(1).get<double>(),
                               ori.at(2).get<double>(), ori.at(3).get<double>()};
  if (cam.fx <= 0 || cam.fy <= 0 || cam.width <= 0 || cam.height <= 0) {
    throw MalformedJson("camera '" + cam.name + "': fx, fy, width, height must be positive");
  }
  return cam;
}

}  // namespace

std::string cameras_to_json(const std::vector<CameraModel>& cameras) {
  nlohmann::json arr = nlohmann::json::array();
  for (const CameraModel& cam : cameras) arr.push_back(camera_to_json_obj(cam));
  return arr.dump();
}

std::vector<CameraModel> cameras_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedJson(e.what());
  }
  try {
    std::vector<CameraModel> out;
    if (j.is_array()) {
      for (const auto& item : j) out.push_back(camera_from_json_obj(item));
    } else {
      out.push_back(camera_from_json_obj(j));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedJson(e.what());
  }
}

std::optional<Pixel> project_point(const CameraModel& cam, const Vec3& p) {
  const Vec3 pc = transform_point(cam.extrinsic, p);
  if (pc.z <= 1e-9) return std::nullopt;
  return Pixel{cam.fx * pc.x / pc.z + cam.cx, cam.fy * pc.y / pc.z + cam.cy};
}

std::vector<std::optional<Pixel>> project_joint_poses(const CameraModel& cam,
                                                      const KinematicChain& chain,
                                                      std::span<const double> q) {
  const std::vector<Pose> poses = forward_kinematics(chain, q);
  std::vector<std::optional<Pixel>> out;
  out.reserve(poses.size());
  for (const Pose& pose : poses) out.push_back(project_point(cam, pose.position));
  return out;
}

ReprojectionReport validate_episode(const Episode& episode,
                                    const KinematicChain& chain,
                                    const std::vector<CameraModel>& cameras,
                                    const ValidateOptions& opts) {
  ReprojectionReport report;
  report.threshold_px = opts.threshold_px;
  report.per_camera_mean_px.assign(cameras.size(), 0.0);

  std::vector<double> per_camera_sum(cameras.size(), 0.0);
  std::vector<std::size_t> per_camera_count(cameras.size(), 0);
  double total_sum = 0.0;
  std::size_t total_count = 0;
  std::size_t out_of_image = 0;
  std::size_t projected = 0;

  for (std::size_t f = 0; f < episode.frames.size(); ++f) {
    const Frame& frame = episode.frames[f];
    if (!frame.annotations.empty() && frame.annotations.size() != cameras.size()) {
      throw FrameCountMismatch("frame " + std::to_string(f) + " carries " +
                               std::to_string(frame.annotations.size()) +
                               " camera annotations, expected " +
                               std::to_string(cameras.size()));
    }
    double frame_sum = 0.0;
    std::size_t frame_count = 0;
    for (std::size_t c = 0; c < cameras.size(); ++c) {
      const auto pixels = project_joint_poses(cameras[c], chain, frame.q);
      for (std::size_t jidx = 0; jidx < pixels.size(); ++jidx) {
        const auto& px = pixels[jidx];
        ++projected;
        const bool inside = px.has_value() && px->u >= 0.0 && px->v >= 0.0 &&
                            px->u < cameras[c].width && px->v < cameras[c].height;
        if (!inside) ++out_of_image;
        if (frame.annotations.empty()) continue;
        const FrameAnnotation& ann = frame.annotations[c];
        if (ann.pixels.size() != pixels.size()) {
          throw FrameCountMismatch("frame " + std::to_string(f) + " camera " +
                                   std::to_string(c) + ": keypoint count " +
                                   std::to_string(ann.pixels.size()) +
                                   " does not match joint count");
        }
        if (!ann.valid.empty() && !ann.valid[jidx]) continue;
        if (!px.has_value()) continue;
        const double du = px->u - ann.pixels[jidx][0];
        const double dv = px->v - ann.pixels[jidx][1];
        const double err = std::sqrt(du * du + dv * dv);
        frame_sum += err;
        ++frame_count;
        per_camera_sum[c] += err;
        ++per_camera_count[c];
        report.episode_max_px = std::max(report.episode_max_px, err);
      }
    }
    report.per_frame_mean_px.push_back(frame_count ? frame_sum / frame_count : 0.0);
    total_sum += frame_sum;
    total_count += frame_count;
  }

  for (std::size_t c = 0; c < cameras.size(); ++c) {
    report.per_camera_mean_px[c] =
        per_camera_count[c] ? per_camera_sum[c] / per_camera_count[c] : 0.0;
  }
  report.episode_mean_px = total_count ? total_sum / total_count : 0.0;
  report.out_of_image_fraction =
      projected ? static_cast<double>(out_of_image) / static_cast<double>(projected) : 0.0;
  report.pass = !(report.episode_mean_px > opts.threshold_px ||
                  report.out_of_image_fraction > opts.max_out_of_image_fraction);
  return report;
}

std::string reprojection_report_to_json(const ReprojectionReport& report) {
  nlohmann::json j;
  j["verdict"] = report.pass ? "pass" : "fail";
  j["episode_mean_px"] = report.episode_mean_px;
  j["episode_max_px"] = report.episode_max_px;
  j["out_of_image_fraction"] = report.out_of_image_fraction;
  j["threshold_px"] = report.threshold_px;
  j["per_camera_mean_px"] = report.per_camera_mean_px;
  j["frames"] = report.per_frame_mean_px.size();
  return j.dump(2);
}

}  // namespace chunkrt
