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

#ifndef CHUNKRT_DATAGEN_HPP_
#define CHUNKRT_DATAGEN_HPP_

#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "chunkrt/camera.hpp"
#include "chunkrt/episode.hpp"
#include "chunkrt/trainer.hpp"
#include "chunkrt/urdf.hpp"

namespace chunkrt {

// Quintic 10s^3 - 15s^4 + 6s^5 and its derivatives; zero velocity and
// acceleration at both endpoints.
double min_jerk(double s);
double min_jerk_vel(double s);
double min_jerk_acc(double s);

// Closed-form planar 2-link inverse kinematics. elbow_up selects the branch
// with positive elbow angle. nullopt when the target is out of reach.
std::optional<std::pair<double, double>> two_link_ik(double l1, double l2,
                                                     double tx, double ty,
                                                     bool elbow_up);

// The planar 2-link fixture used by the synthetic expert: revolute z-axes,
// link lengths l1 and l2.
KinematicChain planar_two_link_chain(double l1 = 0.3, double l2 = 0.2);

// Overhead fixture camera that keeps the whole workspace in frame.
CameraModel desk_camera();

struct ReachDatasetConfig {
  int episodes = 100;
  std::uint64_t seed = 0;
  double l1 = 0.3;
  double l2 = 0.2;
  std::int64_t control_period_ns = 20'000'000;
  int min_steps = 64;
  int max_steps = 128;
  // Bimodal variant: one fixed start/target, elbow-up and elbow-down expert
  // solutions emitted 50/50. Exercises multimodal training.
  bool bimodal = false;
  int bimodal_motion_steps = 20;
  int max_ik_attempts = 100;
};

struct GeneratedEpisodeInfo {
  std::string file;
  std::array<double, 2> target{};
  std::string mode;  // "up" | "down"
  std::vector<double> start;
};

struct GeneratedDataset {
  std::string directory;
  std::vector<GeneratedEpisodeInfo> episodes;
};

// Writes episode files plus manifest.json into `out_dir` (created if
// missing). Deterministic per seed. Episodes carry per-frame keypoint
// annotations from the fixture camera so the validators accept them.
GeneratedDataset generate_reach_dataset(const ReachDatasetConfig& cfg,
                                        const std::string& out_dir);

// In-memory dataset ready for training-sample construction.
struct ReachDataset {
  KinematicChain chain;
  std::int64_t control_period_ns = 0;
  int njoints = 0;
  struct EpisodeData {
    std::vector<std::vector<double>> q;    // per frame
    std::vector<std::vector<Pose>> poses;  // per frame, per joint
    std::array<double, 2> target{};
    std::string mode;
  };
  std::vector<EpisodeData> episodes;

  int obs_dim() const { return njoints + 2; }

  // Chunk of hybrid deltas starting at `frame`, padded by holding the last
  // state. obs = joint vector at `frame` ++ target.
  TrainSample make_sample(std::size_t episode, std::size_t frame, int horizon) const;

  // Uniform (episode, frame) draw with the chunk fully inside real frames
  // when possible.
  TrainSample sample(std::mt19937_64& rng, int horizon) const;
};

ReachDataset load_reach_dataset(const std::string& dir);

}  // namespace chunkrt

#endif  // CHUNKRT_DATAGEN_HPP_
