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

#include "chunkrt/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <variant>

#include <nlohmann/json.hpp>

#include "chunkrt/errors.hpp"

namespace chunkrt {

namespace {

struct Binding {
  std::variant<int*, double*, bool*, std::string*, std::uint64_t*> target;

  void set_from_json(const nlohmann::json& v, const std::string& path) {
    try {
      if (auto** p = std::get_if<int*>(&target)) {
        **p = v.get<int>();
      } else if (auto** p = std::get_if<double*>(&target)) {
        **p = v.get<double>();
      } else if (auto** p = std::get_if<bool*>(&target)) {
        **p = v.get<bool>();
      } else if (auto** p = std::get_if<std::string*>(&target)) {
        **p = v.get<std::string>();
      } else if (auto** p = std::get_if<std::uint64_t*>(&target)) {
        **p = v.get<std::uint64_t>();
      }
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("config key '" + path + "' has the wrong type");
    }
  }

  void set_from_string(const std::string& v, const std::string& path) {
    try {
      if (auto** p = std::get_if<int*>(&target)) {
        **p = std::stoi(v);
      } else if (auto** p = std::get_if<double*>(&target)) {
        **p = std::stod(v);
      } else if (auto** p = std::get_if<bool*>(&target)) {
        if (v == "true" || v == "1") {
          **p = true;
        } else if (v == "false" || v == "0") {
          **p = false;
        } else {
          throw ConfigError("");
        }
      } else if (auto** p = std::get_if<std::string*>(&target)) {
        **p = v;
      } else if (auto** p = std::get_if<std::uint64_t*>(&target)) {
        **p = std::stoull(v);
      }
    } catch (const std::exception&) {
      throw ConfigError("environment value for '" + path + "' is malformed: " + v);
    }
  }

  std::string to_string() const {
    if (auto* const* p = std::get_if<int*>(&target)) return std::to_string(**p);
    if (auto* const* p = std::get_if<double*>(&target)) return std::to_string(**p);
    if (auto* const* p = std::get_if<bool*>(&target)) return **p ? "true" : "false";
    if (auto* const* p = std::get_if<std::string*>(&target)) return **p;
    if (auto* const* p = std::get_if<std::uint64_t*>(&target)) return std::to_string(**p);
    return "";
  }
};

std::map<std::string, Binding> bindings(RunConfig& cfg) {
  return {
      {"schema_version", {&cfg.schema_version}},
      {"runtime.control_period_ms", {&cfg.control_period_ms}},
      {"runtime.horizon", {&cfg.horizon}},
      {"runtime.sample_steps", {&cfg.sample_steps}},
      {"runtime.rtc_enabled", {&cfg.rtc_enabled}},
      {"runtime.fusion_window", {&cfg.fusion_window}},
      {"runtime.decay", {&cfg.decay}},
      {"train.steps", {&cfg.train_steps}},
      {"train.batch", {&cfg.train_batch}},
      {"train.lr", {&cfg.lr}},
      {"train.momentum", {&cfg.momentum}},
      {"train.hidden", {&cfg.hidden}},
      {"train.tf_ratio", {&cfg.tf_ratio}},
      {"train.tf_poisson_mean", {&cfg.tf_poisson_mean}},
      {"train.wtm_candidates", {&cfg.wtm_candidates}},
      {"train.wtm_enabled", {&cfg.wtm_enabled}},
      {"train.lambda_joint", {&cfg.lambda_joint}},
      {"train.lambda_pose", {&cfg.lambda_pose}},
      {"train.lambda_pose_fk", {&cfg.lambda_pose_fk}},
      {"train.smooth_l1_beta", {&cfg.smooth_l1_beta}},
      {"train.diffusion_steps", {&cfg.diffusion_steps}},
      {"action.quat_delta", {&cfg.quat_delta}},
      {"action.delta_frame", {&cfg.delta_frame}},
      {"validate.threshold_px", {&cfg.validate_threshold_px}},
      {"validate.out_of_image_fraction", {&cfg.validate_out_of_image_fraction}},
      {"validate.integrity_gap_factor", {&cfg.integrity_gap_factor}},
      {"plant.vmax", {&cfg.plant_vmax}},
      {"plant.success_tolerance_m", {&cfg.success_tolerance_m}},
      {"plant.success_hold_ticks", {&cfg.success_hold_ticks}},
      {"plant.max_ticks", {&cfg.max_ticks}},
      {"seed", {&cfg.seed}},
      {"kinematics.gripper_pattern", {&cfg.gripper_pattern}},
  };
}

void walk_json(const nlohmann::json& node, const std::string& prefix,
               std::map<std::string, Binding>& keys) {
  for (const auto& [key, value] : node.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      walk_json(value, path, keys);
      continue;
    }
    const auto it = keys.find(path);
    if (it == keys.end()) {
      throw ConfigError("unknown config key '" + path + "'");
    }
    it->second.set_from_json(value, path);
  }
}

std::string env_name(const std::string& path) {
  std::string out = "HB0_";
  for (char c : path) {
    out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

void validate(const RunConfig& cfg) {
  if (cfg.schema_version != 1) {
    throw ConfigError("unsupported config schema_version " +
                      std::to_string(cfg.schema_version));
  }
  if (cfg.quat_delta == "relative") {
    throw UnsupportedConfig(
        "action.quat_delta=relative is reserved but not built; use 'componentwise'");
  }
  if (cfg.quat_delta != "componentwise") {
    throw ConfigError("action.quat_delta must be 'componentwise' or 'relative'");
  }
  if (cfg.delta_frame != "base") {
    throw UnsupportedConfig("action.delta_frame supports only 'base'");
  }
  if (cfg.decay != "linear" && cfg.decay != "quadratic" && cfg.decay != "exp" &&
      cfg.decay != "exponential") {
    throw ConfigError("runtime.decay must be linear, quadratic, or exp");
  }
  if (cfg.tf_ratio < 0.0 || cfg.tf_ratio > 1.0) {
    throw ConfigError("train.tf_ratio must lie in [0, 1]");
  }
  if (cfg.tf_poisson_mean < 0.0) {
    throw ConfigError("train.tf_poisson_mean must be >= 0");
  }
  if (cfg.horizon < 1 || cfg.fusion_window < 1 || cfg.sample_steps < 1) {
    throw ConfigError("horizon, fusion_window, and sample_steps must be >= 1");
  }
}

}  // namespace

RunConfig load_run_config(const std::string& config_path) {
  RunConfig cfg;
  auto keys = bindings(cfg);

  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config file: " + config_path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config file: " + std::string(e.what()));
    }
    walk_json(j, "", keys);
  }

  for (auto& [path, binding] : keys) {
    if (const char* v = std::getenv(env_name(path).c_str())) {
      binding.set_from_string(v, path);
    }
  }

  validate(cfg);
  return cfg;
}

void visit_config_keys(
    const RunConfig& cfg,
    const std::function<void(const std::string&, const std::string&)>& fn) {
  auto keys = bindings(const_cast<RunConfig&>(cfg));
  for (const auto& [path, binding] : keys) fn(path, binding.to_string());
}

}  // namespace chunkrt
