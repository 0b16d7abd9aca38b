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

#include "chunkrt/engine.hpp"

#include <cmath>
#include <string>

#include "chunkrt/errors.hpp"

namespace chunkrt {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

InferenceEngine::InferenceEngine(ToyDenoiser model, KinematicChain chain,
                                 EngineConfig cfg)
    : model_(std::move(model)),
      chain_(std::move(chain)),
      schedule_(build_cosine_schedule(1000)),
      cfg_(cfg) {
  if (model_.shape().action_dim != static_cast<int>(chain_.njoints()) * kActionDim) {
    throw DimensionMismatch("model action dim " +
                            std::to_string(model_.shape().action_dim) +
                            " does not match chain joints");
  }
}

int InferenceEngine::delay_steps(double latency_ns) const {
  if (latency_ns <= 0.0) return 0;
  const int d = static_cast<int>(
      std::ceil(latency_ns / static_cast<double>(cfg_.control_period_ns)));
  return std::min(d, horizon() - 1);
}

ChunkResponse InferenceEngine::infer(SessionState& session,
                                     const ObservationRequest& req) const {
  if (req.q.size() != chain_.njoints()) {
    throw DimensionMismatch("observation joint vector has " +
                            std::to_string(req.q.size()) + " entries, expected " +
                            std::to_string(chain_.njoints()));
  }
  if (static_cast<int>(req.features.size()) != model_.shape().obs_dim) {
    throw DimensionMismatch("observation features have " +
                            std::to_string(req.features.size()) +
                            " entries, expected " +
                            std::to_string(model_.shape().obs_dim));
  }

  if (req.latency_ns > 0) {
    const double sample = static_cast<double>(req.latency_ns);
    session.latency_ema_ns =
        session.have_latency
            ? cfg_.latency_ema_alpha * sample +
                  (1.0 - cfg_.latency_ema_alpha) * session.latency_ema_ns
            : sample;
    session.have_latency = true;
  }

  const RobotState reference =
      RobotState::from_joints(chain_, req.q, req.timestamp_ns);
  const int h = horizon();
  const int dim = model_.shape().action_dim;

  // Deterministic per (engine seed, session, sequence).
  std::mt19937_64 rng(splitmix64(cfg_.seed ^ splitmix64(req.session) ^
                                 splitmix64(req.sequence * 0x51ed2701)));
  const Matrix x_init = randn_matrix(h, dim, rng);
  const DenoiseFn denoiser = model_.bind(req.features);

  Matrix chunk;
  if (cfg_.rtc_enabled && session.prev_chunk.has_value()) {
    AlignedPrev aligned = align_previous_chunk(*session.prev_chunk, req.executed, h);
    // Previous deltas are relative to the previous reference; shift them so
    // they encode the same absolute targets relative to the new reference.
    const RobotState& pref = *session.prev_reference;
    const std::size_t n = chain_.njoints();
    for (int t = 0; t < h; ++t) {
      if (!aligned.available[t]) continue;
      auto row = aligned.rows.row(t);
      for (std::size_t i = 0; i < n; ++i) {
        double* cell = row.data() + i * kActionDim;
        cell[0] += pref.q[i] - reference.q[i];
        cell[1] += pref.poses[i].position.x - reference.poses[i].position.x;
        cell[2] += pref.poses[i].position.y - reference.poses[i].position.y;
        cell[3] += pref.poses[i].position.z - reference.poses[i].position.z;
        cell[4] += pref.poses[i].orientation.w - reference.poses[i].orientation.w;
        cell[5] += pref.poses[i].orientation.x - reference.poses[i].orientation.x;
        cell[6] += pref.poses[i].orientation.y - reference.poses[i].orientation.y;
        cell[7] += pref.poses[i].orientation.z - reference.poses[i].orientation.z;
      }
    }
    RtcConfig rtc;
    rtc.delay = delay_steps(session.have_latency ? session.latency_ema_ns : 0.0);
    rtc.fusion_window = cfg_.fusion_window;
    rtc.decay = cfg_.decay;
    rtc.horizon = h;
    chunk = guided_denoise(schedule_, x_init, denoiser, cfg_.sample_steps, aligned, rtc);
  } else {
    chunk = deterministic_denoise(schedule_, x_init, denoiser, cfg_.sample_steps);
  }

  session.prev_chunk = chunk;
  session.prev_reference = reference;
  session.last_sequence = req.sequence;

  ChunkResponse resp;
  resp.session = req.session;
  resp.sequence = req.sequence;
  resp.chunk = std::move(chunk);
  resp.reference_q = req.q;
  resp.generated_ns = req.timestamp_ns;
  return resp;
}

InferenceEngine load_engine(const std::string& model_path,
                            const KinematicChain& chain, const EngineConfig& cfg) {
  const ModelMeta meta = read_model_meta(model_path + ".json");
  if (meta.chain_hash != 0 && meta.chain_hash != chain_hash(chain)) {
    throw ConfigError("model was trained against a different chain (hash mismatch)");
  }
  ToyDenoiser model = ToyDenoiser::load(model_path, meta.to_shape(kActionDim));
  return InferenceEngine(std::move(model), chain, cfg);
}

}  // namespace chunkrt
