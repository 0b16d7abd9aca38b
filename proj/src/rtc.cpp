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

#include "chunkrt/rtc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chunkrt/errors.hpp"

namespace chunkrt {

const char* decay_kind_name(DecayKind k) {
  switch (k) {
    case DecayKind::kLinear: return "linear";
    case DecayKind::kQuadratic: return "quadratic";
    case DecayKind::kExponential: return "exp";
  }
  return "unknown";
}

DecayKind decay_kind_from_name(const std::string& name) {
  if (name == "linear") return DecayKind::kLinear;
  if (name == "quadratic") return DecayKind::kQuadratic;
  if (name == "exp" || name == "exponential") return DecayKind::kExponential;
  throw ConfigError("unknown decay kind '" + name + "'");
}

std::vector<double> compute_rho(const RtcConfig& cfg) {
  if (cfg.fusion_window < 1) throw ConfigError("fusion window must be >= 1");
  if (cfg.delay < 0) throw ConfigError("delay must be >= 0");
  std::vector<double> rho(cfg.horizon, 0.0);
  for (int t = 0; t < cfg.horizon; ++t) {
    if (t <= cfg.delay) {
      rho[t] = 1.0;
    } else if (t < cfg.delay + cfg.fusion_window) {
      rho[t] = 1.0 - static_cast<double>(t - cfg.delay) / cfg.fusion_window;
    } else {
      rho[t] = 0.0;
    }
  }
  return rho;
}

GuidanceWeights compute_weights(const std::vector<double>& rho, DecayKind decay) {
  GuidanceWeights out;
  out.w.resize(rho.size());
  constexpr double kExpDenom = M_E - 1.0;
  for (std::size_t t = 0; t < rho.size(); ++t) {
    const double r = rho[t];
    switch (decay) {
      case DecayKind::kLinear:
        out.w[t] = r;
        break;
      case DecayKind::kQuadratic:
        out.w[t] = r * r;
        break;
      case DecayKind::kExponential:
        out.w[t] = r * (std::exp(r) - 1.0) / kExpDenom;
        break;
    }
  }
  return out;
}

AlignedPrev align_previous_chunk(const Matrix& prev, int executed, int horizon) {
  if (executed < 0 || executed > prev.rows) {
    throw ShapeMismatch("executed index " + std::to_string(executed) +
                        " outside [0, " + std::to_string(prev.rows) + "]");
  }
  AlignedPrev out;
  out.rows = Matrix(horizon, prev.cols);
  out.available.assign(horizon, 0);
  const int remaining = prev.rows - executed;
  for (int t = 0; t < std::min(horizon, remaining); ++t) {
    std::copy_n(prev.row(executed + t).begin(), prev.cols, out.rows.row(t).begin());
    out.available[t] = 1;
  }
  return out;
}

void mask_unavailable(GuidanceWeights& weights, const AlignedPrev& prev) {
  for (std::size_t t = 0; t < weights.w.size() && t < prev.available.size(); ++t) {
    if (!prev.available[t]) weights.w[t] = 0.0;
  }
  for (std::size_t t = prev.available.size(); t < weights.w.size(); ++t) {
    weights.w[t] = 0.0;
  }
}

Matrix blend(const Matrix& x0_hat, const AlignedPrev& a_prev,
             const GuidanceWeights& weights) {
  if (!x0_hat.same_shape(a_prev.rows) ||
      weights.w.size() != static_cast<std::size_t>(x0_hat.rows)) {
    throw ShapeMismatch("blend: chunk/weights shapes disagree");
  }
  Matrix out = x0_hat;
  for (int t = 0; t < out.rows; ++t) {
    const double w = weights.w[t];
    if (w == 0.0) continue;
    auto dst = out.row(t);
    const auto prev = a_prev.rows.row(t);
    const auto hat = x0_hat.row(t);
    if (w == 1.0) {
      // The strict-consistency plateau copies history verbatim; no rounding.
      std::copy(prev.begin(), prev.end(), dst.begin());
      continue;
    }
    for (int c = 0; c < out.cols; ++c) {
      dst[c] = hat[c] + w * (prev[c] - hat[c]);
    }
  }
  return out;
}

Matrix guided_denoise(const NoiseSchedule& sched, const Matrix& x_init,
                      const DenoiseFn& denoiser, int sample_steps,
                      const std::optional<AlignedPrev>& prev, const RtcConfig& cfg) {
  if (!prev.has_value()) {
    return deterministic_denoise(sched, x_init, denoiser, sample_steps);
  }
  GuidanceWeights weights = compute_weights(compute_rho(cfg), cfg.decay);
  mask_unavailable(weights, *prev);
  const AlignedPrev& aligned = *prev;
  GuidanceFn guidance = [&aligned, &weights](Matrix x0_hat, int) {
    return blend(x0_hat, aligned, weights);
  };
  return deterministic_denoise(sched, x_init, denoiser, sample_steps, guidance);
}

}  // namespace chunkrt
