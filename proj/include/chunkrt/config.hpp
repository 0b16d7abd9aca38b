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

#ifndef CHUNKRT_CONFIG_HPP_
#define CHUNKRT_CONFIG_HPP_

#include <cstdint>
#include <functional>
#include <string>

namespace chunkrt {

// Merged tunables for the CLI. Precedence: flags > environment (HB0_*) >
// config file (JSON) > defaults. Unknown config keys are rejected with the
// offending path named.
struct RunConfig {
  int schema_version = 1;

  // runtime
  double control_period_ms = 20.0;
  int horizon = 32;
  int sample_steps = 10;
  bool rtc_enabled = true;
  int fusion_window = 8;
  std::string decay = "linear";

  // training
  int train_steps = 3000;
  int train_batch = 16;
  double lr = 1e-3;
  double momentum = 0.9;
  int hidden = 128;
  double tf_ratio = 0.25;
  double tf_poisson_mean = 16.0;
  int wtm_candidates = 4;
  bool wtm_enabled = true;
  double lambda_joint = 1.0;
  double lambda_pose = 1.0;
  double lambda_pose_fk = 1.0;
  double smooth_l1_beta = 0.04;
  int diffusion_steps = 1000;

  // action space
  std::string quat_delta = "componentwise";  // "relative" reserved, not built
  std::string delta_frame = "base";

  // validation
  double validate_threshold_px = 8.0;
  double validate_out_of_image_fraction = 0.2;
  double integrity_gap_factor = 3.0;

  // plant / benchmark
  double plant_vmax = 5.0;
  double success_tolerance_m = 0.02;
  int success_hold_ticks = 10;
  int max_ticks = 400;

  std::uint64_t seed = 0;
  std::string gripper_pattern = "gripper";

  std::int64_t control_period_ns() const {
    return static_cast<std::int64_t>(control_period_ms * 1e6);
  }
};

// File (optional) then HB0_* environment overrides. Throws ConfigError on
// unknown keys, bad values, or reserved-but-unbuilt selections.
RunConfig load_run_config(const std::string& config_path = "");

// Visits every known key as (dotted path, current value as string).
void visit_config_keys(const RunConfig& cfg,
                       const std::function<void(const std::string&, const std::string&)>& fn);

}  // namespace chunkrt

#endif  // CHUNKRT_CONFIG_HPP_
