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

#ifndef CHUNKRT_EPISODE_HPP_
#define CHUNKRT_EPISODE_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "chunkrt/camera.hpp"

namespace chunkrt {

// Recorded joint keypoints for one camera: pixel per joint plus a validity
// flag (false when the joint sat behind the camera at record time).
struct FrameAnnotation {
  std::vector<std::array<double, 2>> pixels;
  std::vector<std::uint8_t> valid;

  bool operator==(const FrameAnnotation&) const = default;
};

struct Frame {
  std::int64_t timestamp_ns = 0;
  std::vector<double> q;
  // One entry per header camera when present, empty when not annotated.
  std::vector<FrameAnnotation> annotations;
  std::string instruction;

  bool operator==(const Frame&) const = default;
};

struct EpisodeHeader {
  std::string embodiment;
  int njoints = 0;
  std::uint64_t chain_hash = 0;
  std::vector<CameraModel> cameras;
  std::int64_t control_period_ns = 20'000'000;
  std::string task;

  bool operator==(const EpisodeHeader&) const = default;
};

struct Episode {
  EpisodeHeader header;
  std::vector<Frame> frames;

  bool operator==(const Episode&) const = default;
};

// One JSON header line, then length-prefixed little-endian binary frame
// records. Round-trips bit-exact; see README for the byte layout.
void write_episode(const std::string& path, const Episode& episode);
Episode read_episode(const std::string& path);

struct IntegrityReport {
  std::size_t frame_count = 0;
  std::int64_t median_period_ns = 0;
  std::int64_t gap_threshold_ns = 0;
  // (frame index i, gap between frame i and i+1 in ns) for flagged gaps.
  std::vector<std::pair<std::size_t, std::int64_t>> dropped_intervals;
  std::size_t nonmonotonic_count = 0;
  bool pass = false;
};

// Flags inter-frame gaps larger than gap_factor x median period and any
// non-increasing timestamps. Throws TooFewFrames below 2 frames.
IntegrityReport integrity_check(const Episode& episode, double gap_factor = 3.0);

std::string integrity_report_to_json(const IntegrityReport& report);

struct StaticPruneOptions {
  double min_delta = 1e-4;    // per-joint absolute motion threshold
  int max_run = 10;           // frames of stillness kept before pruning starts
  // Half-open frame index ranges exempt from pruning (flagged task phases).
  std::vector<std::pair<std::size_t, std::size_t>> keep_ranges;
};

// Drops the tail of every static run longer than max_run frames.
Episode prune_static_frames(const Episode& episode, const StaticPruneOptions& opts = {});

}  // namespace chunkrt

#endif  // CHUNKRT_EPISODE_HPP_
