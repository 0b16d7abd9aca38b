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

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "chunkrt/config.hpp"
#include "chunkrt/errors.hpp"

namespace chunkrt {
namespace {

std::string write_config(const std::string& body) {
  const std::string path = "/tmp/chunkrt_config_test.json";
  std::ofstream out(path, std::ios::trunc);
  out << body;
  return path;
}

TEST_CASE("defaults load without a file") {
  const RunConfig cfg = load_run_config();
  CHECK(cfg.control_period_ms == 20.0);
  CHECK(cfg.tf_ratio == 0.25);
  CHECK(cfg.wtm_candidates == 4);
  CHECK(cfg.smooth_l1_beta == 0.04);
  CHECK(cfg.diffusion_steps == 1000);
  CHECK(cfg.validate_threshold_px == 8.0);
  CHECK(cfg.integrity_gap_factor == 3.0);
}

TEST_CASE("file values override defaults") {
  const std::string path = write_config(
      R"({"runtime": {"horizon": 48, "decay": "quadratic"}, "train": {"lr": 0.01}})");
  const RunConfig cfg = load_run_config(path);
  CHECK(cfg.horizon == 48);
  CHECK(cfg.decay == "quadratic");
  CHECK(cfg.lr == doctest::Approx(0.01));
  std::filesystem::remove(path);
}

TEST_CASE("unknown keys are rejected with their path") {
  const std::string path = write_config(R"({"runtime": {"horizont": 48}})");
  try {
    load_run_config(path);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("runtime.horizont") != std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST_CASE("environment overrides the file") {
  const std::string path = write_config(R"({"runtime": {"horizon": 48}})");
  ::setenv("HB0_RUNTIME_HORIZON", "24", 1);
  ::setenv("HB0_TRAIN_TF_RATIO", "0.5", 1);
  const RunConfig cfg = load_run_config(path);
  ::unsetenv("HB0_RUNTIME_HORIZON");
  ::unsetenv("HB0_TRAIN_TF_RATIO");
  CHECK(cfg.horizon == 24);
  CHECK(cfg.tf_ratio == doctest::Approx(0.5));
  std::filesystem::remove(path);
}

TEST_CASE("reserved-but-unbuilt selections fail loudly") {
  const std::string path = write_config(R"({"action": {"quat_delta": "relative"}})");
  CHECK_THROWS_AS(load_run_config(path), UnsupportedConfig);
  std::filesystem::remove(path);
}

TEST_CASE("bad values are rejected") {
  const std::string path = write_config(R"({"train": {"tf_ratio": 1.5}})");
  CHECK_THROWS_AS(load_run_config(path), ConfigError);
  std::filesystem::remove(path);

  const std::string p2 = write_config(R"({"schema_version": 7})");
  CHECK_THROWS_AS(load_run_config(p2), ConfigError);
  std::filesystem::remove(p2);
}

TEST_CASE("every key is visitable") {
  const RunConfig cfg = load_run_config();
  int count = 0;
  visit_config_keys(cfg, [&](const std::string& path, const std::string& value) {
    CHECK_FALSE(path.empty());
    CHECK_FALSE(value.empty());
    ++count;
  });
  CHECK(count >= 30);
}

}  // namespace
}  // namespace chunkrt
