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

#ifndef CHUNKRT_DENOISER_HPP_
#define CHUNKRT_DENOISER_HPP_

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chunkrt/matrix.hpp"
#include "chunkrt/sampler.hpp"

namespace chunkrt {

// Sinusoidal timestep features, sin/cos interleaved.
void timestep_embedding(int tau, std::span<double> out);

// Dense x-prediction network: flattened noisy chunk ++ observation features
// ++ timestep embedding -> flattened chunk. Two hidden layers. Parameters
// live in one flat vector so the optimizer and the finite-difference checker
// can treat the model as a plain parameter blob.
class ToyDenoiser {
 public:
  enum class Activation { kTanh, kIdentity };

  struct Shape {
    int horizon = 0;
    int action_dim = 0;  // columns of a chunk
    int obs_dim = 0;
    // The observation block is tiled this many times so a handful of
    // conditioning values is not drowned out by the chunk features.
    int obs_repeat = 16;
    int temb_dim = 32;
    int hidden = 256;
    int diffusion_steps = 1000;  // T of the schedule this model trains under
    Activation activation = Activation::kTanh;

    // The noisy chunk enters as a handful of strided rows plus per-column
    // row means. Feeding all H rows lets the net shortcut into copying its
    // input, which the few-step sampler then amplifies; the summary keeps
    // the mode signal and the teacher-forced prefix visible without the
    // copy path.
    int sampled_rows() const { return std::min(horizon, 4); }
    int chunk_feature_dim() const { return (sampled_rows() + 1) * action_dim; }

    int chunk_size() const { return horizon * action_dim; }
    int input_dim() const {
      return chunk_feature_dim() + obs_dim * obs_repeat + temb_dim;
    }
    int output_dim() const { return chunk_size(); }
  };

  ToyDenoiser() = default;
  ToyDenoiser(const Shape& shape, std::uint64_t seed);

  const Shape& shape() const { return shape_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  std::size_t param_count() const { return params_.size(); }

  // Chunk-derived input features are scaled by sqrt(alpha_bar_tau), the
  // known signal fraction at the timestep. Heavily noised inputs then fade
  // toward zero and the prediction falls back to the observation
  // regression, which every training sample exercises.
  double input_scale(int tau) const;

  // Scratch buffers for one forward/backward pair.
  struct Workspace {
    std::vector<double> input;
    std::vector<double> z1, a1, z2, a2, y;
    std::vector<double> dz1, dz2;
  };

  void build_input(const Matrix& x, std::span<const double> obs, int tau,
                   std::vector<double>& out) const;

  // Forward pass; activations stay in the workspace for backward().
  void forward(Workspace& ws) const;

  // Accumulates parameter gradients into `grad` (same layout as params),
  // scaled by `scale`. `dLdy` is the loss gradient at the output.
  void backward(Workspace& ws, std::span<const double> dLdy, double scale,
                std::vector<double>& grad) const;

  // Convenience inference entry point.
  Matrix denoise(const Matrix& x, std::span<const double> obs, int tau) const;

  // Binds observation features; the result fits the sampler interface.
  DenoiseFn bind(std::vector<double> obs) const;

  // "HBTD" magic, u32 version, u32 dim count, u32 dims, then parameters as
  // little-endian f64 (row-major weight matrices, each followed by its bias).
  void save(const std::string& path) const;
  static ToyDenoiser load(const std::string& path, const Shape& shape);

  bool finite() const;

 private:
  Shape shape_;
  std::vector<double> params_;
  std::vector<double> alpha_bar_;
  // Offsets into params_: W1, b1, W2, b2, W3, b3.
  std::size_t w1_ = 0, b1_ = 0, w2_ = 0, b2_ = 0, w3_ = 0, b3_ = 0;

  void compute_offsets();
};

// Sidecar metadata describing how to drive a saved model.
struct ModelMeta {
  int horizon = 0;
  int njoints = 0;
  int obs_dim = 0;
  int obs_repeat = 16;
  int temb_dim = 32;
  int hidden = 256;
  std::string activation = "tanh";
  std::uint64_t chain_hash = 0;

  ToyDenoiser::Shape to_shape(int action_dim_per_joint) const;
};

void write_model_meta(const std::string& path, const ModelMeta& meta);
ModelMeta read_model_meta(const std::string& path);

}  // namespace chunkrt

#endif  // CHUNKRT_DENOISER_HPP_
