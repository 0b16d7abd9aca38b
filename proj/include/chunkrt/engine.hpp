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

#ifndef CHUNKRT_ENGINE_HPP_
#define CHUNKRT_ENGINE_HPP_

#include <optional>

#include "chunkrt/denoiser.hpp"
#include "chunkrt/embodiment.hpp"
#include "chunkrt/rtc.hpp"
#include "chunkrt/wire.hpp"

namespace chunkrt {

struct EngineConfig {
  bool rtc_enabled = true;
  int fusion_window = 8;
  DecayKind decay = DecayKind::kLinear;
  int sample_steps = 10;
  std::int64_t control_period_ns = 20'000'000;
  double latency_ema_alpha = 0.25;
  std::uint64_t seed = 0;
};

// Per-session bookkeeping: the last issued chunk, its reference state, and
// the latency estimate the delay d derives from.
struct SessionState {
  std::optional<Matrix> prev_chunk;
  std::optional<RobotState> prev_reference;
  double latency_ema_ns = 0.0;
  bool have_latency = false;
  std::uint64_t last_sequence = 0;
};

// Turns observation requests into action chunks: measures latency, aligns
// and re-bases the unexecuted remainder of the previous chunk, and runs the
// guided (or plain) denoise loop. Stateless across sessions; callers own the
// SessionState. Safe to share across serving threads.
class InferenceEngine {
 public:
  InferenceEngine(ToyDenoiser model, KinematicChain chain, EngineConfig cfg);

  ChunkResponse infer(SessionState& session, const ObservationRequest& req) const;

  // Delay in whole control steps implied by a latency estimate.
  int delay_steps(double latency_ns) const;

  const KinematicChain& chain() const { return chain_; }
  const ToyDenoiser& model() const { return model_; }
  const EngineConfig& config() const { return cfg_; }
  int horizon() const { return model_.shape().horizon; }

 private:
  ToyDenoiser model_;
  KinematicChain chain_;
  NoiseSchedule schedule_;
  EngineConfig cfg_;
};

// Loads model.bin plus its .json sidecar and checks the chain matches.
InferenceEngine load_engine(const std::string& model_path,
                            const KinematicChain& chain, const EngineConfig& cfg);

}  // namespace chunkrt

#endif  // CHUNKRT_ENGINE_HPP_
