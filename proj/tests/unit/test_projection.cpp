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

#include <doctest.h>

#include "chunkrt/camera.hpp"
#include "chunkrt/datagen.hpp"
#include "chunkrt/episode.hpp"
#include "chunkrt/errors.hpp"

namespace chunkrt {
namespace {

CameraModel simple_camera() {
  CameraModel cam;
  cam.fx = cam.fy = 100.0;
  cam.cx = cam.cy = 64.0;
  cam.width = 128;
  cam.height = 128;
  cam.extrinsic = Pose::identity();
  return cam;
}

TEST_CASE("points on the optical axis hit the principal point") {
  const auto px = project_point(simple_camera(), {0, 0, 1});
  REQUIRE(px.has_value());
  CHECK(px->u == doctest::Approx(64.0));
  CHECK(px->v == doctest::Approx(64.0));
}

TEST_CASE("pinhole formula") {
  const auto px = project_point(simple_camera(), {0.1, 0, 1});
  REQUIRE(px.has_value());
  CHECK(px->u == doctest::Approx(74.0));
  CHECK(px->v == doctest::Approx(64.0));
}

TEST_CASE("points behind the camera do not project") {
  CHECK_FALSE(project_point(simple_camera(), {0, 0, -1}).has_value());
  CHECK_FALSE(project_point(simple_camera(), {0, 0, 0}).has_value());
}

TEST_CASE("joint poses project through fk") {
  const KinematicChain chain = planar_two_link_chain(0.3, 0.2);
  const CameraModel cam = desk_camera();
  const auto pixels = project_joint_poses(cam, chain, {{0.0, 0.0, 0.0}});
  REQUIRE(pixels.size() == 3);
  // Base joint sits on the optical axis of the overhead camera.
  REQUIRE(pixels[0].has_value());
  CHECK(pixels[0]->u == doctest::Approx(cam.cx));
  CHECK(pixels[0]->v == doctest::Approx(cam.cy));
  // Elbow at x = 0.3 m, depth 1 m: u = cx + fx * 0.3.
  REQUIRE(pixels[1].has_value());
  CHECK(pixels[1]->u == doctest::Approx(cam.cx + cam.fx * 0.3));

  // A camera above the plane looking further up sees none of it.
  CameraModel away = cam;
  away.extrinsic = invert(Pose{{0, 0, 1.0}, Quat::identity()});
  const auto none = project_joint_poses(away, chain, {{0.0, 0.0, 0.0}});
  for (const auto& px : none) CHECK_FALSE(px.has_value());
}

Episode small_fixture_episode(const KinematicChain& chain, const CameraModel& cam) {
  // Limited-motion trajectory that stays well inside the image.
  ReachDatasetConfig cfg;
  cfg.episodes = 1;
  cfg.seed = 424242;
  GeneratedDataset ds = generate_reach_dataset(cfg, "/tmp/chunkrt_proj_fixture");
  Episode ep = read_episode("/tmp/chunkrt_proj_fixture/ep00000.ep");
  (void)chain;
  (void)cam;
  return ep;
}

TEST_CASE("self-consistent annotations validate with zero error") {
  const KinematicChain chain = planar_two_link_chain(0.3, 0.2);
  const CameraModel cam = desk_camera();
  const Episode ep = small_fixture_episode(chain, cam);
  const ReprojectionReport report = validate_episode(ep, chain, {cam}, {});
  CHECK(report.episode_mean_px == doctest::Approx(0.0));
  CHECK(report.episode_max_px == doctest::Approx(0.0));
  CHECK(report.pass);
}

TEST_CASE("a 2 cm extrinsic error at 1 m depth fails the 8 px gate") {
  const KinematicChain chain = planar_two_link_chain(0.3, 0.2);
  const CameraModel cam = desk_camera();
  const Episode ep = small_fixture_episode(chain, cam);

  CameraModel corrupted = cam;
  corrupted.extrinsic.position.x += 0.02;  // camera-frame lateral shift
  const ReprojectionReport report = validate_episode(ep, chain, {corrupted}, {});
  // u-shift is about fx * 0.02 / z = 600 * 0.02 / 1 = 12 px.
  CHECK(report.episode_mean_px == doctest::Approx(12.0).epsilon(0.05));
  CHECK_FALSE(report.pass);

  // An infinite threshold always passes.
  ValidateOptions lax;
  lax.threshold_px = std::numeric_limits<double>::infinity();
  CHECK(validate_episode(ep, chain, {corrupted}, lax).pass);
}

TEST_CASE("out-of-image fraction fails even with matching annotations") {
  const KinematicChain chain = planar_two_link_chain(0.3, 0.2);
  CameraModel tiny = desk_camera();
  tiny.width = 8;  // almost everything lands outside
  Episode ep = small_fixture_episode(chain, desk_camera());
  // Re-annotate with the tiny camera so the pixel error itself is zero.
  for (Frame& frame : ep.frames) {
    frame.annotations.clear();
    FrameAnnotation ann;
    for (const auto& px : project_joint_poses(tiny, chain, frame.q)) {
      ann.pixels.push_back(px ? std::array<double, 2>{px->u, px->v}
                              : std::array<double, 2>{0, 0});
      ann.valid.push_back(px.has_value());
    }
    frame.annotations.push_back(ann);
  }
  const ReprojectionReport report = validate_episode(ep, chain, {tiny}, {});
  CHECK(report.episode_mean_px == doctest::Approx(0.0));
  CHECK(report.out_of_image_fraction > 0.2);
  CHECK_FALSE(report.pass);
}

TEST_CASE("reprojection error grows monotonically with the perturbation") {
  const KinematicChain chain = planar_two_link_chain(0.3, 0.2);
  const CameraModel cam = desk_camera();
  const Episode ep = small_fixture_episode(chain, cam);
  double last = -1.0;
  for (double shift : {0.0, 0.005, 0.01, 0.02, 0.04, 0.08}) {
    CameraModel c = cam;
    c.extrinsic.position.x += shift;
    ValidateOptions lax;
    lax.threshold_px = 1e9;
    lax.max_out_of_image_fraction = 1.0;
    const double err = validate_episode(ep, chain, {c}, lax).episode_mean_px;
    CHECK(err >= last);
    last = err;
  }
}

TEST_CASE("scale check: mean u-error tracks fx * dx / z on a single point") {
  const KinematicChain chain = planar_two_link_chain(0.3, 0.2);
  const CameraModel cam = desk_camera();
  // One frame, annotations from the clean camera.
  Episode ep;
  ep.header.njoints = 3;
  ep.header.cameras = {cam};
  Frame frame;
  frame.timestamp_ns = 0;
  frame.q = {0.3, 0.5, 0.0};
  FrameAnnotation ann;
  for (const auto& px : project_joint_poses(cam, chain, frame.q)) {
    REQUIRE(px.has_value());
    ann.pixels.push_back({px->u, px->v});
    ann.valid.push_back(1);
  }
  frame.annotations.push_back(ann);
  ep.frames.push_back(frame);

  CameraModel shifted = cam;
  const double dx = 0.01;
  shifted.extrinsic.position.x += dx;
  ValidateOptions lax;
  lax.threshold_px = 1e9;
  const double err = validate_episode(ep, chain, {shifted}, lax).episode_mean_px;
  const double predicted = cam.fx * dx / 1.0;  // plane sits 1 m below
  CHECK(std::abs(err - predicted) / predicted < 0.05);
}

TEST_CASE("annotation count mismatches are rejected") {
  const KinematicChain chain = planar_two_link_chain(0.3, 0.2);
  const CameraModel cam = desk_camera();
  Episode ep = small_fixture_episode(chain, cam);
  ep.frames[0].annotations.push_back(ep.frames[0].annotations[0]);
  CHECK_THROWS_AS(validate_episode(ep, chain, {cam}, {}), FrameCountMismatch);
}

TEST_CASE("camera json round-trips") {
  const std::vector<CameraModel> cams = {desk_camera(), simple_camera()};
  const std::vector<CameraModel> back = cameras_from_json(cameras_to_json(cams));
  REQUIRE(back.size() == 2);
  CHECK(back[0] == cams[0]);
  CHECK(back[1] == cams[1]);
  CHECK_THROWS_AS(cameras_from_json("{not json"), MalformedJson);
}

}  // namespace
}  // namespace chunkrt
