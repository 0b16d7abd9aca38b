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

#include "chunkrt/episode.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "chunkrt/errors.hpp"

namespace chunkrt {

namespace {

constexpr const char* kFormatTag = "chunkrt-episode";
constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::string& buf, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  buf.append(b, 4);
}

void put_i64(std::string& buf, std::int64_t v) {
  char b[8];
  std::memcpy(b, &v, 8);
  buf.append(b, 8);
}

void put_f64(std::string& buf, double v) {
  char b[8];
  std::memcpy(b, &v, 8);
  buf.append(b, 8);
}

struct Cursor {
  const char* p;
  const char* end;
  std::size_t frame;

  void need(std::size_t n) const {
    if (static_cast<std::size_t>(end - p) < n) {
      throw CorruptFrame(frame, "record truncated");
    }
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v;
    std::memcpy(&v, p, 4);
    p += 4;
    return v;
  }
  std::int64_t i64() {
    need(8);
    std::int64_t v;
    std::memcpy(&v, p, 8);
    p += 8;
    return v;
  }
  double f64() {
    need(8);
    double v;
    std::memcpy(&v, p, 8);
    p += 8;
    return v;
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(*p++);
  }
};

nlohmann::json header_to_json(const EpisodeHeader& h) {
  nlohmann::json j;
  j["format"] = kFormatTag;
  j["version"] = kFormatVersion;
  j["embodiment"] = h.embodiment;
  j["njoints"] = h.njoints;
  j["chain_hash"] = h.chain_hash;
  j["control_period_ns"] = h.control_period_ns;
  j["task"] = h.task;
  j["cameras"] = nlohmann::json::parse(cameras_to_json(h.cameras));
  return j;
}

EpisodeHeader header_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != kFormatTag) {
    throw FormatVersionMismatch("not a " + std::string(kFormatTag) + " file");
  }
  if (j.value("version", 0u) != kFormatVersion) {
    throw FormatVersionMismatch("unsupported episode format version " +
                                std::to_string(j.value("version", 0u)));
  }
  EpisodeHeader h;
  h.embodiment = j.value("embodiment", "");
  h.njoints = j.at("njoints").get<int>();
  h.chain_hash = j.value("chain_hash", std::uint64_t{0});
  h.control_period_ns = j.value("control_period_ns", std::int64_t{20'000'000});
  h.task = j.value("task", "");
  h.cameras = cameras_from_json(j.at("cameras").dump());
  return h;
}

}  // namespace

void write_episode(const std::string& path, const Episode& episode) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << header_to_json(episode.header).dump() << "\n";

  const std::size_t ncam = episode.header.cameras.size();
  const std::size_t nj = static_cast<std::size_t>(episode.header.njoints);
  for (std::size_t f = 0; f < episode.frames.size(); ++f) {
    const Frame& frame = episode.frames[f];
    if (frame.q.size() != nj) {
      throw DimensionMismatch("frame " + std::to_string(f) + ": joint vector length " +
                              std::to_string(frame.q.size()) + " != header njoints " +
                              std::to_string(nj));
    }
    std::string payload;
    put_i64(payload, frame.timestamp_ns);
    for (double v : frame.q) put_f64(payload, v);
    const bool has_ann = !frame.annotations.empty();
    payload.push_back(has_ann ? '\1' : '\0');
    if (has_ann) {
      if (frame.annotations.size() != ncam) {
        throw DimensionMismatch("frame " + std::to_string(f) +
                                ": annotation count does not match camera list");
      }
      for (const FrameAnnotation& ann : frame.annotations) {
        if (ann.pixels.size() != nj || ann.valid.size() != nj) {
          throw DimensionMismatch("frame " + std::to_string(f) +
                                  ": keypoint count does not match njoints");
        }
        for (std::size_t k = 0; k < nj; ++k) {
          put_f64(payload, ann.pixels[k][0]);
          put_f64(payload, ann.pixels[k][1]);
          payload.push_back(ann.valid[k] ? '\1' : '\0');
        }
      }
    }
    put_u32(payload, static_cast<std::uint32_t>(frame.instruction.size()));
    payload += frame.instruction;

    std::string record;
    put_u32(record, static_cast<std::uint32_t>(payload.size()));
    out << record << payload;
  }
  if (!out) throw IoError("write failed: " + path);
}

Episode read_episode(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);

  std::string header_line;
  if (!std::getline(in, header_line)) throw IoError("empty episode file: " + path);
  nlohmann::json hj;
  try {
    hj = nlohmann::json::parse(header_line);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad episode header: " + std::string(e.what()));
  }

  Episode episode;
  episode.header = header_from_json(hj);
  const std::size_t nj = static_cast<std::size_t>(episode.header.njoints);
  const std::size_t ncam = episode.header.cameras.size();

  std::string rest((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const char* p = rest.data();
  const char* end = rest.data() + rest.size();
  std::size_t frame_index = 0;
  while (p < end) {
    if (static_cast<std::size_t>(end - p) < 4) {
      throw CorruptFrame(frame_index, "truncated length prefix");
    }
    std::uint32_t len;
    std::memcpy(&len, p, 4);
    p += 4;
    if (static_cast<std::size_t>(end - p) < len) {
      throw CorruptFrame(frame_index, "record shorter than its length prefix");
    }
    Cursor cur{p, p + len, frame_index};
    Frame frame;
    frame.timestamp_ns = cur.i64();
    frame.q.resize(nj);
    for (std::size_t k = 0; k < nj; ++k) frame.q[k] = cur.f64();
    const bool has_ann = cur.u8() != 0;
    if (has_ann) {
      frame.annotations.resize(ncam);
      for (FrameAnnotation& ann : frame.annotations) {
        ann.pixels.resize(nj);
        ann.valid.resize(nj);
        for (std::size_t k = 0; k < nj; ++k) {
          ann.pixels[k][0] = cur.f64();
          ann.pixels[k][1] = cur.f64();
          ann.valid[k] = cur.u8();
        }
      }
    }
    const std::uint32_t instr_len = cur.u32();
    cur.need(instr_len);
    frame.instruction.assign(cur.p, instr_len);
    cur.p += instr_len;
    if (cur.p != cur.end) {
      throw CorruptFrame(frame_index, "record longer than its payload");
    }
    p += len;
    episode.frames.push_back(std::move(frame));
    ++frame_index;
  }
  return episode;
}

IntegrityReport integrity_check(const Episode& episode, double gap_factor) {
  if (episode.frames.size() < 2) {
    throw TooFewFrames("integrity check needs at least 2 frames, got " +
                       std::to_string(episode.frames.size()));
  }
  IntegrityReport report;
  report.frame_count = episode.frames.size();

  std::vector<std::int64_t> periods;
  periods.reserve(episode.frames.size() - 1);
  for (std::size_t i = 0; i + 1 < episode.frames.size(); ++i) {
    const std::int64_t dt =
        episode.frames[i + 1].timestamp_ns - episode.frames[i].timestamp_ns;
    if (dt <= 0) ++report.nonmonotonic_count;
    periods.push_back(dt);
  }
  std::vector<std::int64_t> sorted = periods;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  report.median_period_ns = sorted[sorted.size() / 2];
  report.gap_threshold_ns =
      static_cast<std::int64_t>(gap_factor * static_cast<double>(report.median_period_ns));

  for (std::size_t i = 0; i < periods.size(); ++i) {
    if (periods[i] > report.gap_threshold_ns) {
      report.dropped_intervals.emplace_back(i, periods[i]);
    }
  }
  report.pass = report.nonmonotonic_count == 0 && report.dropped_intervals.empty();
  return report;
}

std::string integrity_report_to_json(const IntegrityReport& report) {
  nlohmann::json j;
  j["verdict"] = report.pass ? "pass" : "fail";
  j["frames"] = report.frame_count;
  j["median_period_ns"] = report.median_period_ns;
  j["gap_threshold_ns"] = report.gap_threshold_ns;
  j["nonmonotonic_count"] = report.nonmonotonic_count;
  nlohmann::json gaps = nlohmann::json::array();
  for (const auto& [index, gap] : report.dropped_intervals) {
    gaps.push_back({{"after_frame", index}, {"gap_ns", gap}});
  }
  j["dropped_intervals"] = gaps;
  return j.dump(2);
}

Episode prune_static_frames(const Episode& episode, const StaticPruneOptions& opts) {
  Episode out;
  out.header = episode.header;
  if (episode.frames.empty()) return out;

  auto kept_by_range = [&](std::size_t i) {
    for (const auto& [lo, hi] : opts.keep_ranges) {
      if (i >= lo && i < hi) return true;
    }
    return false;
  };

  int run = 0;
  for (std::size_t i = 0; i < episode.frames.size(); ++i) {
    bool moving = i == 0;
    if (i > 0) {
      const auto& prev = episode.frames[i - 1].q;
      const auto& cur = episode.frames[i].q;
      for (std::size_t k = 0; k < cur.size(); ++k) {
        if (std::abs(cur[k] - prev[k]) >= opts.min_delta) {
          moving = true;
          break;
        }
      }
    }
    run = moving ? 0 : run + 1;
    if (run > opts.max_run && !kept_by_range(i)) continue;
    out.frames.push_back(episode.frames[i]);
  }
  return out;
}

}  // namespace chunkrt
