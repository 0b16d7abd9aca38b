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

#include "chunkrt/datagen.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "chunkrt/errors.hpp"

namespace chunkrt {

double min_jerk(double s) { return s * s * s * (10.0 + s * (-15.0 + 6.0 * s)); }

double min_jerk_vel(double s) { return s * s * (30.0 + s * (-60.0 + 30.0 * s)); }

double min_jerk_acc(double s) { return s * (60.0 + s * (-180.0 + 120.0 * s)); }

std::optional<std::pair<double, double>> two_link_ik(double l1, double l2,
                                                     double tx, double ty,
                                                     bool elbow_up) {
  const double r2 = tx * tx + ty * ty;
  const double c = (r2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
  if (c < -1.0 || c > 1.0) return std::nullopt;
  const double q2 = elbow_up ? std::acos(c) : -std::acos(c);
  const double q1 =
      std::atan2(ty, tx) - std::atan2(l2 * std::sin(q2), l1 + l2 * std::cos(q2));
  return std::make_pair(q1, q2);
}

KinematicChain planar_two_link_chain(double l1, double l2) {
  char buf[1024];
  std::snprintf(buf, sizeof(buf), R"(
<robot name="planar2">
  <link name="base"/>
  <link name="link1"/>
  <link name="link2"/>
  <link name="tool"/>
  <joint name="shoulder" type="revolute">
    <parent link="base"/><child link="link1"/>
    <origin xyz="0 0 0" rpy="0 0 0"/><axis xyz="0 0 1"/>
    <limit lower="-3.0" upper="3.0"/>
  </joint>
  <joint name="elbow" type="revolute">
    <parent link="link1"/><child link="link2"/>
    <origin xyz="%.17g 0 0" rpy="0 0 0"/><axis xyz="0 0 1"/>
    <limit lower="-3.0" upper="3.0"/>
  </joint>
  <joint name="tool_gripper" type="prismatic">
    <parent link="link2"/><child link="tool"/>
    <origin xyz="%.17g 0 0" rpy="0 0 0"/><axis xyz="0 0 1"/>
    <limit lower="0" upper="0.05"/>
  </joint>
</robot>)",
                l1, l2);
  return parse_urdf(buf).chain;
}

CameraModel desk_camera() {
  CameraModel cam;
  cam.name = "overhead";
  cam.fx = cam.fy = 600.0;
  cam.cx = 320.0;
  cam.cy = 320.0;
  cam.width = 640;
  cam.height = 640;
  // Camera 1 m above the base, optical axis straight down; the extrinsic
  // maps base-frame points into the camera frame.
  Pose cam_in_base;
  cam_in_base.position = {0.0, 0.0, 1.0};
  cam_in_base.orientation = {0.0, 1.0, 0.0, 0.0};  // 180 deg about x
  cam.extrinsic = invert(cam_in_base);
  return cam;
}

namespace {

struct ExpertTrajectory {
  std::vector<std::vector<double>> q;  // per frame
  std::array<double, 2> target{};
  std::string mode;
};

ExpertTrajectory make_trajectory(const std::vector<double>& start,
                                 const std::array<double, 2>& target, bool elbow_up,
                                 double l1, double l2, int motion_steps,
                                 int hold_steps) {
  const auto ik = two_link_ik(l1, l2, target[0], target[1], elbow_up);
  if (!ik) throw UnreachableTarget("internal: unreachable target in trajectory");
  ExpertTrajectory traj;
  traj.target = target;
  traj.mode = elbow_up ? "up" : "down";
  const std::vector<double> goal = {ik->first, ik->second, start[2]};
  for (int t = 0; t <= motion_steps; ++t) {
    const double s = min_jerk(static_cast<double>(t) / motion_steps);
    std::vector<double> q(start.size());
    for (std::size_t i = 0; i < start.size(); ++i) {
      q[i] = start[i] + s * (goal[i] - start[i]);
    }
    traj.q.push_back(std::move(q));
  }
  for (int t = 0; t < hold_steps; ++t) traj.q.push_back(goal);
  return traj;
}

Episode trajectory_to_episode(const ExpertTrajectory& traj,
                              const KinematicChain& chain,
                              const std::vector<CameraModel>& cameras,
                              std::int64_t period_ns, const std::string& task) {
  Episode ep;
  ep.header.embodiment = chain.name;
  ep.header.njoints = static_cast<int>(chain.njoints());
  ep.header.chain_hash = chain_hash(chain);
  ep.header.cameras = cameras;
  ep.header.control_period_ns = period_ns;
  ep.header.task = task;
  for (std::size_t t = 0; t < traj.q.size(); ++t) {
    Frame frame;
    frame.timestamp_ns = static_cast<std::int64_t>(t) * period_ns;
    frame.q = traj.q[t];
    for (const CameraModel& cam : cameras) {
      FrameAnnotation ann;
      const auto pixels = project_joint_poses(cam, chain, frame.q);
      for (const auto& px : pixels) {
        ann.pixels.push_back(px ? std::array<double, 2>{px->u, px->v}
                                : std::array<double, 2>{0.0, 0.0});
        ann.valid.push_back(px.has_value() ? 1 : 0);
      }
      frame.annotations.push_back(std::move(ann));
    }
    ep.frames.push_back(std::move(frame));
  }
  return ep;
}

}  // namespace

GeneratedDataset generate_reach_dataset(const ReachDatasetConfig& cfg,
                                        const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  const KinematicChain chain = planar_two_link_chain(cfg.l1, cfg.l2);
  const std::vector<CameraModel> cameras = {desk_camera()};
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const double reach_lo = std::abs(cfg.l1 - cfg.l2) + 0.02;
  const double reach_hi = cfg.l1 + cfg.l2 - 0.02;

  GeneratedDataset dataset;
  dataset.directory = out_dir;

  for (int e = 0; e < cfg.episodes; ++e) {
    std::vector<double> start;
    std::array<double, 2> target{};
    bool elbow_up = true;
    int motion_steps = 0;
    int hold_steps = 15;

    if (cfg.bimodal) {
      // One ambiguous task: a close-in target both elbow branches can reach
      // with strongly separated joint paths.
      start = {0.35, 0.0, 0.02};
      target = {0.13, 0.05};
      elbow_up = e % 2 == 0;
      motion_steps = cfg.bimodal_motion_steps;
      hold_steps = 63 - motion_steps;
    } else {
      start = {unif(rng) * 3.0 - 1.5, 0.2 + unif(rng) * 2.6, 0.02};
      int attempts = 0;
      for (;; ++attempts) {
        if (attempts >= cfg.max_ik_attempts) {
          throw UnreachableTarget("no reachable target after " +
                                  std::to_string(attempts) + " attempts");
        }
        const double radius = reach_lo + unif(rng) * (reach_hi - reach_lo);
        const double angle = unif(rng) * 2.0 * M_PI - M_PI;
        target = {radius * std::cos(angle), radius * std::sin(angle)};
        if (two_link_ik(cfg.l1, cfg.l2, target[0], target[1], true)) break;
      }
      const int span = cfg.max_steps - cfg.min_steps;
      motion_steps = cfg.min_steps - hold_steps - 1 +
                     static_cast<int>(unif(rng) * (span + 1));
    }

    const ExpertTrajectory traj = make_trajectory(start, target, elbow_up, cfg.l1,
                                                  cfg.l2, motion_steps, hold_steps);
    const Episode ep = trajectory_to_episode(traj, chain, cameras,
                                             cfg.control_period_ns, "reach2d");
    char name[32];
    std::snprintf(name, sizeof(name), "ep%05d.ep", e);
    write_episode((fs::path(out_dir) / name).string(), ep);

    GeneratedEpisodeInfo info;
    info.file = name;
    info.target = target;
    info.mode = traj.mode;
    info.start = start;
    dataset.episodes.push_back(std::move(info));
  }

  nlohmann::json manifest;
  manifest["format"] = "chunkrt-dataset";
  manifest["version"] = 1;
  manifest["seed"] = cfg.seed;
  manifest["bimodal"] = cfg.bimodal;
  manifest["control_period_ns"] = cfg.control_period_ns;
  manifest["urdf"] = serialize_urdf(chain);
  nlohmann::json eps = nlohmann::json::array();
  for (const auto& info : dataset.episodes) {
    eps.push_back({{"file", info.file},
                   {"target", info.target},
                   {"mode", info.mode},
                   {"start", info.start}});
  }
  manifest["episodes"] = eps;
  std::ofstream mf(fs::path(out_dir) / "manifest.json", std::ios::trunc);
  if (!mf) throw IoError("cannot write manifest in " + out_dir);
  mf << manifest.dump(2) << "\n";
  return dataset;
}

TrainSample ReachDataset::make_sample(std::size_t episode, std::size_t frame,
                                      int horizon) const {
  const EpisodeData& ep = episodes.at(episode);
  const std::size_t last = ep.q.size() - 1;

  RobotState current;
  current.q = ep.q[frame];
  current.poses = ep.poses[frame];
  current.timestamp_ns = static_cast<std::int64_t>(frame) * control_period_ns;

  TrainSample sample;
  sample.current = current;
  sample.obs = ep.q[frame];
  sample.obs.push_back(ep.target[0]);
  sample.obs.push_back(ep.target[1]);
  sample.gt = Matrix(horizon, njoints * kActionDim);
  for (int k = 0; k < horizon; ++k) {
    const std::size_t idx = std::min(frame + 1 + k, last);
    RobotState target;
    target.q = ep.q[idx];
    target.poses = ep.poses[idx];
    const HybridAction deltas = relative_action(current, target);
    std::copy(deltas.begin(), deltas.end(), sample.gt.row(k).begin());
  }
  return sample;
}

TrainSample ReachDataset::sample(std::mt19937_64& rng, int horizon) const {
  std::uniform_int_distribution<std::size_t> ep_dist(0, episodes.size() - 1);
  const std::size_t e = ep_dist(rng);
  const std::size_t len = episodes[e].q.size();
  const std::size_t max_start =
      len > static_cast<std::size_t>(horizon) + 1 ? len - horizon - 1 : 0;
  std::uniform_int_distribution<std::size_t> frame_dist(0, max_start);
  return make_sample(e, frame_dist(rng), horizon);
}

ReachDataset load_reach_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream mf(fs::path(dir) / "manifest.json");
  if (!mf) throw IoError("cannot open manifest.json in " + dir);
  nlohmann::json manifest;
  try {
    mf >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedJson("manifest.json: " + std::string(e.what()));
  }
  if (manifest.value("format", "") != "chunkrt-dataset") {
    throw FormatVersionMismatch(dir + ": not a chunkrt dataset");
  }

  ReachDataset data;
  data.chain = parse_urdf(manifest.at("urdf").get<std::string>()).chain;
  data.control_period_ns = manifest.value("control_period_ns", std::int64_t{20'000'000});
  data.njoints = static_cast<int>(data.chain.njoints());

  for (const auto& info : manifest.at("episodes")) {
    const Episode ep =
        read_episode((fs::path(dir) / info.at("file").get<std::string>()).string());
    ReachDataset::EpisodeData ed;
    ed.target = {info.at("target").at(0).get<double>(),
                 info.at("target").at(1).get<double>()};
    ed.mode = info.value("mode", "up");
    for (const Frame& frame : ep.frames) {
      ed.q.push_back(frame.q);
      ed.poses.push_back(forward_kinematics(data.chain, frame.q));
    }
    data.episodes.push_back(std::move(ed));
  }
  if (data.episodes.empty()) throw IoError("dataset in " + dir + " has no episodes");
  return data;
}

}  // namespace chunkrt
