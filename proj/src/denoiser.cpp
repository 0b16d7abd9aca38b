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

#include "chunkrt/denoiser.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "chunkrt/errors.hpp"
#include "chunkrt/schedule.hpp"

namespace chunkrt {

namespace {

constexpr char kMagic[4] = {'H', 'B', 'T', 'D'};
constexpr std::uint32_t kModelVersion = 1;

inline double activate(double z, ToyDenoiser::Activation act) {
  return act == ToyDenoiser::Activation::kTanh ? std::tanh(z) : z;
}

inline double activate_grad(double a, ToyDenoiser::Activation act) {
  // tanh' expressed through the activation value itself.
  return act == ToyDenoiser::Activation::kTanh ? 1.0 - a * a : 1.0;
}

// y = W x + b, W is (out x in) row-major.
void dense_forward(const double* w, const double* b, std::span<const double> x,
                   std::span<double> y) {
  const std::size_t in = x.size();
  for (std::size_t r = 0; r < y.size(); ++r) {
    const double* row = w + r * in;
    double acc = b[r];
    for (std::size_t c = 0; c < in; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

}  // namespace

void timestep_embedding(int tau, std::span<double> out) {
  const std::size_t half = out.size() / 2;
  for (std::size_t i = 0; i < half; ++i) {
    const double freq =
        std::pow(10000.0, -2.0 * static_cast<double>(i) / static_cast<double>(out.size()));
    out[2 * i] = std::sin(tau * freq);
    out[2 * i + 1] = std::cos(tau * freq);
  }
  if (out.size() % 2 == 1) out[out.size() - 1] = 0.0;
}

ToyDenoiser::ToyDenoiser(const Shape& shape, std::uint64_t seed) : shape_(shape) {
  alpha_bar_ = build_cosine_schedule(shape.diffusion_steps).alpha_bar;
  compute_offsets();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int in = shape_.input_dim();
  const int h = shape_.hidden;
  auto init_layer = [&](std::size_t w_off, std::size_t b_off, int rows, int cols) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
    for (int i = 0; i < rows * cols; ++i) params_[w_off + i] = gauss(rng) * scale;
    for (int i = 0; i < rows; ++i) params_[b_off + i] = 0.0;
  };
  init_layer(w1_, b1_, h, in);
  init_layer(w2_, b2_, h, h);
  init_layer(w3_, b3_, shape_.output_dim(), h);
  // Start the head near zero: the zero chunk is already close to the small
  // relative actions this model regresses, which speeds up early training.
  for (std::size_t i = w3_; i < b3_; ++i) params_[i] *= 0.02;
}

void ToyDenoiser::compute_offsets() {
  const std::size_t in = shape_.input_dim();
  const std::size_t h = shape_.hidden;
  const std::size_t out = shape_.output_dim();
  w1_ = 0;
  b1_ = w1_ + h * in;
  w2_ = b1_ + h;
  b2_ = w2_ + h * h;
  w3_ = b2_ + h;
  b3_ = w3_ + out * h;
  params_.assign(b3_ + out, 0.0);
}

double ToyDenoiser::input_scale(int tau) const {
  if (tau < 0 || tau >= static_cast<int>(alpha_bar_.size())) {
    throw TimestepOutOfRange("denoiser timestep " + std::to_string(tau) +
                             " outside its schedule");
  }
  return std::sqrt(alpha_bar_[tau]);
}

void ToyDenoiser::build_input(const Matrix& x, std::span<const double> obs, int tau,
                              std::vector<double>& out) const {
  if (x.rows != shape_.horizon || x.cols != shape_.action_dim) {
    throw ShapeMismatch("denoiser input chunk is " + std::to_string(x.rows) + "x" +
                        std::to_string(x.cols) + ", expected " +
                        std::to_string(shape_.horizon) + "x" +
                        std::to_string(shape_.action_dim));
  }
  if (static_cast<int>(obs.size()) != shape_.obs_dim) {
    throw ShapeMismatch("observation feature size " + std::to_string(obs.size()) +
                        ", expected " + std::to_string(shape_.obs_dim));
  }
  out.resize(shape_.input_dim());
  const double scale = input_scale(tau);
  auto cursor = out.begin();
  const int nsample = shape_.sampled_rows();
  for (int k = 0; k < nsample; ++k) {
    const int row = k * shape_.horizon / nsample;
    for (int c = 0; c < x.cols; ++c) *cursor++ = scale * x.at(row, c);
  }
  for (int c = 0; c < x.cols; ++c) {
    double acc = 0.0;
    for (int r = 0; r < x.rows; ++r) acc += x.at(r, c);
    *cursor++ = scale * acc / x.rows;
  }
  for (int rep = 0; rep < shape_.obs_repeat; ++rep) {
    cursor = std::copy(obs.begin(), obs.end(), cursor);
  }
  timestep_embedding(tau,
                     std::span<double>(out).subspan(cursor - out.begin()));
}

void ToyDenoiser::forward(Workspace& ws) const {
  const int h = shape_.hidden;
  const int out = shape_.output_dim();
  ws.z1.resize(h);
  ws.a1.resize(h);
  ws.z2.resize(h);
  ws.a2.resize(h);
  ws.y.resize(out);
  dense_forward(params_.data() + w1_, params_.data() + b1_, ws.input, ws.z1);
  for (int i = 0; i < h; ++i) ws.a1[i] = activate(ws.z1[i], shape_.activation);
  dense_forward(params_.data() + w2_, params_.data() + b2_, ws.a1, ws.z2);
  for (int i = 0; i < h; ++i) ws.a2[i] = activate(ws.z2[i], shape_.activation);
  dense_forward(params_.data() + w3_, params_.data() + b3_, ws.a2, ws.y);
}

void ToyDenoiser::backward(Workspace& ws, std::span<const double> dLdy,
                           double scale, std::vector<double>& grad) const {
  const int h = shape_.hidden;
  const int out = shape_.output_dim();
  const int in = shape_.input_dim();

  // Layer 3: dW3 = dLdy ⊗ a2, da2 = W3^T dLdy.
  std::vector<double>& dz2 = ws.dz2;
  std::vector<double>& dz1 = ws.dz1;
  dz2.assign(h, 0.0);
  dz1.assign(h, 0.0);

  const double* w3 = params_.data() + w3_;
  double* gw3 = grad.data() + w3_;
  double* gb3 = grad.data() + b3_;
  for (int r = 0; r < out; ++r) {
    const double d = dLdy[r] * scale;
    if (d == 0.0) continue;
    double* grow = gw3 + static_cast<std::size_t>(r) * h;
    const double* wrow = w3 + static_cast<std::size_t>(r) * h;
    for (int c = 0; c < h; ++c) {
      grow[c] += d * ws.a2[c];
      dz2[c] += d * wrow[c];
    }
    gb3[r] += d;
  }
  for (int c = 0; c < h; ++c) dz2[c] *= activate_grad(ws.a2[c], shape_.activation);

  const double* w2 = params_.data() + w2_;
  double* gw2 = grad.data() + w2_;
  double* gb2 = grad.data() + b2_;
  for (int r = 0; r < h; ++r) {
    const double d = dz2[r];
    if (d == 0.0) continue;
    double* grow = gw2 + static_cast<std::size_t>(r) * h;
    const double* wrow = w2 + static_cast<std::size_t>(r) * h;
    for (int c = 0; c < h; ++c) {
      grow[c] += d * ws.a1[c];
      dz1[c] += d * wrow[c];
    }
    gb2[r] += d;
  }
  for (int c = 0; c < h; ++c) dz1[c] *= activate_grad(ws.a1[c], shape_.activation);

  double* gw1 = grad.data() + w1_;
  double* gb1 = grad.data() + b1_;
  for (int r = 0; r < h; ++r) {
    const double d = dz1[r];
    if (d == 0.0) continue;
    double* grow = gw1 + static_cast<std::size_t>(r) * in;
    for (int c = 0; c < in; ++c) grow[c] += d * ws.input[c];
    gb1[r] += d;
  }
}

Matrix ToyDenoiser::denoise(const Matrix& x, std::span<const double> obs,
                            int tau) const {
  Workspace ws;
  build_input(x, obs, tau, ws.input);
  forward(ws);
  Matrix out(shape_.horizon, shape_.action_dim);
  std::copy(ws.y.begin(), ws.y.end(), out.data.begin());
  return out;
}

DenoiseFn ToyDenoiser::bind(std::vector<double> obs) const {
  return [this, obs = std::move(obs)](const Matrix& x, int tau) {
    return denoise(x, obs, tau);
  };
}

bool ToyDenoiser::finite() const {
  for (double v : params_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void ToyDenoiser::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(kMagic, 4);
  auto put_u32 = [&](std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), 4);
  };
  put_u32(kModelVersion);
  const std::uint32_t dims[4] = {
      static_cast<std::uint32_t>(shape_.input_dim()),
      static_cast<std::uint32_t>(shape_.hidden),
      static_cast<std::uint32_t>(shape_.hidden),
      static_cast<std::uint32_t>(shape_.output_dim())};
  put_u32(4);
  for (std::uint32_t d : dims) put_u32(d);
  out.write(reinterpret_cast<const char*>(params_.data()),
            static_cast<std::streamsize>(params_.size() * sizeof(double)));
  if (!out) throw IoError("write failed: " + path);
}

ToyDenoiser ToyDenoiser::load(const std::string& path, const Shape& shape) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatVersionMismatch("not a model file: " + path);
  }
  auto get_u32 = [&]() {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
  };
  const std::uint32_t version = get_u32();
  if (version != kModelVersion) {
    throw FormatVersionMismatch("unsupported model version " + std::to_string(version));
  }
  const std::uint32_t ndims = get_u32();
  std::vector<std::uint32_t> dims(ndims);
  for (auto& d : dims) d = get_u32();
  if (!in || ndims != 4) throw FormatVersionMismatch("unexpected layer dim count");

  ToyDenoiser model;
  model.shape_ = shape;
  model.alpha_bar_ = build_cosine_schedule(shape.diffusion_steps).alpha_bar;
  model.compute_offsets();
  if (dims[0] != static_cast<std::uint32_t>(shape.input_dim()) ||
      dims[1] != static_cast<std::uint32_t>(shape.hidden) ||
      dims[2] != static_cast<std::uint32_t>(shape.hidden) ||
      dims[3] != static_cast<std::uint32_t>(shape.output_dim())) {
    throw FormatVersionMismatch("model layer dims do not match the requested shape");
  }
  in.read(reinterpret_cast<char*>(model.params_.data()),
          static_cast<std::streamsize>(model.params_.size() * sizeof(double)));
  if (!in) throw IoError("model file truncated: " + path);
  return model;
}

ToyDenoiser::Shape ModelMeta::to_shape(int action_dim_per_joint) const {
  ToyDenoiser::Shape shape;
  shape.horizon = horizon;
  shape.action_dim = njoints * action_dim_per_joint;
  shape.obs_dim = obs_dim;
  shape.obs_repeat = obs_repeat;
  shape.temb_dim = temb_dim;
  shape.hidden = hidden;
  shape.activation = activation == "identity" ? ToyDenoiser::Activation::kIdentity
                                              : ToyDenoiser::Activation::kTanh;
  return shape;
}

void write_model_meta(const std::string& path, const ModelMeta& meta) {
  nlohmann::json j;
  j["horizon"] = meta.horizon;
  j["njoints"] = meta.njoints;
  j["obs_dim"] = meta.obs_dim;
  j["obs_repeat"] = meta.obs_repeat;
  j["temb_dim"] = meta.temb_dim;
  j["hidden"] = meta.hidden;
  j["activation"] = meta.activation;
  j["chain_hash"] = meta.chain_hash;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

ModelMeta read_model_meta(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  nlohmann::json j;
  try {
    in >> j;
    ModelMeta meta;
    meta.horizon = j.at("horizon").get<int>();
    meta.njoints = j.at("njoints").get<int>();
    meta.obs_dim = j.at("obs_dim").get<int>();
    meta.obs_repeat = j.value("obs_repeat", 16);
    meta.temb_dim = j.value("temb_dim", 32);
    meta.hidden = j.value("hidden", 256);
    meta.activation = j.value("activation", "tanh");
    meta.chain_hash = j.value("chain_hash", std::uint64_t{0});
    return meta;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedJson("model meta: " + std::string(e.what()));
  }
}

}  // namespace chunkrt
