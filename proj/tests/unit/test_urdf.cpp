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

#include "chunkrt/errors.hpp"
#include "chunkrt/urdf.hpp"

namespace chunkrt {
namespace {

constexpr const char* kMinimal = R"(
<robot name="mini">
  <link name="base"/>
  <link name="arm"/>
  <joint name="j0" type="revolute">
    <parent link="base"/><child link="arm"/>
    <axis xyz="0 0 1"/>
    <limit lower="-1.5" upper="1.5"/>
  </joint>
</robot>)";

constexpr const char* kPlanar2 = R"(
<robot name="planar">
  <link name="base"/>
  <link name="l1"/>
  <link name="l2"/>
  <joint name="a" type="revolute">
    <parent link="base"/><child link="l1"/>
    <origin xyz="0 0 0" rpy="0 0 0"/><axis xyz="0 0 1"/>
  </joint>
  <joint name="b" type="revolute">
    <parent link="l1"/><child link="l2"/>
    <origin xyz="1 0 0" rpy="0 0 0"/><axis xyz="0 0 1"/>
  </joint>
</robot>)";

TEST_CASE("minimal single-joint document parses") {
  const UrdfParseResult res = parse_urdf(kMinimal);
  REQUIRE(res.chain.njoints() == 1);
  CHECK(res.chain.joints[0].kind == JointKind::kRevolute);
  CHECK(res.chain.joints[0].name == "j0");
  CHECK(res.chain.joints[0].lower == doctest::Approx(-1.5));
  CHECK(res.chain.links[res.chain.root_link] == "base");
}

TEST_CASE("two-link planar fixture") {
  const UrdfParseResult res = parse_urdf(kPlanar2);
  REQUIRE(res.chain.njoints() == 2);
  for (const Joint& j : res.chain.joints) {
    CHECK(j.axis.x == doctest::Approx(0.0));
    CHECK(j.axis.y == doctest::Approx(0.0));
    CHECK(j.axis.z == doctest::Approx(1.0));
  }
}

TEST_CASE("cycle is rejected") {
  constexpr const char* cyclic = R"(
<robot name="c">
  <link name="a"/><link name="b"/>
  <joint name="j1" type="fixed"><parent link="a"/><child link="b"/></joint>
  <joint name="j2" type="fixed"><parent link="b"/><child link="a"/></joint>
</robot>)";
  CHECK_THROWS_AS(parse_urdf(cyclic), UrdfError);
  try {
    parse_urdf(cyclic);
  } catch (const UrdfError& e) {
    CHECK(e.kind == UrdfError::Kind::kCycleDetected);
  }
}

TEST_CASE("multiple roots are rejected") {
  constexpr const char* forest = R"(
<robot name="f">
  <link name="a"/><link name="b"/><link name="c"/><link name="d"/>
  <joint name="j1" type="fixed"><parent link="a"/><child link="b"/></joint>
  <joint name="j2" type="fixed"><parent link="c"/><child link="d"/></joint>
</robot>)";
  try {
    parse_urdf(forest);
    FAIL("expected UrdfError");
  } catch (const UrdfError& e) {
    CHECK(e.kind == UrdfError::Kind::kMultipleRoots);
  }
}

TEST_CASE("undefined link reference is rejected") {
  constexpr const char* missing = R"(
<robot name="m">
  <link name="a"/>
  <joint name="j" type="fixed"><parent link="a"/><child link="ghost"/></joint>
</robot>)";
  try {
    parse_urdf(missing);
    FAIL("expected UrdfError");
  } catch (const UrdfError& e) {
    CHECK(e.kind == UrdfError::Kind::kMissingLink);
  }
}

TEST_CASE("malformed xml is rejected") {
  try {
    parse_urdf("<robot name='x'><link name='a'>");
    FAIL("expected UrdfError");
  } catch (const UrdfError& e) {
    CHECK(e.kind == UrdfError::Kind::kMalformedXml);
  }
}

TEST_CASE("unsupported elements are warned about, not fatal") {
  constexpr const char* noisy = R"(
<robot name="n">
  <material name="gray"/>
  <link name="a"><visual><geometry/></visual></link>
  <link name="b"/>
  <joint name="j" type="revolute">
    <parent link="a"/><child link="b"/><axis xyz="0 1 0"/>
    <dynamics damping="0.1"/>
  </joint>
  <transmission name="t"/>
</robot>)";
  const UrdfParseResult res = parse_urdf(noisy);
  CHECK(res.chain.njoints() == 1);
  CHECK(res.warnings.size() >= 3);
}

TEST_CASE("gripper joints are classified by name pattern") {
  constexpr const char* gripper = R"(
<robot name="g">
  <link name="a"/><link name="b"/><link name="c"/>
  <joint name="wrist" type="revolute">
    <parent link="a"/><child link="b"/><axis xyz="0 0 1"/>
  </joint>
  <joint name="left_GRIPPER_finger" type="prismatic">
    <parent link="b"/><child link="c"/><axis xyz="1 0 0"/>
  </joint>
</robot>)";
  const UrdfParseResult res = parse_urdf(gripper);
  REQUIRE(res.chain.njoints() == 2);
  CHECK(res.chain.joints[1].kind == JointKind::kGripper);
  CHECK(res.chain.gripper_joints() == std::vector<int>{1});

  // A different pattern leaves it prismatic.
  const UrdfParseResult plain = parse_urdf(gripper, {"claw"});
  CHECK(plain.chain.joints[1].kind == JointKind::kPrismatic);
}

TEST_CASE("sibling joints order lexicographically") {
  constexpr const char* branched = R"(
<robot name="br">
  <link name="root"/><link name="x"/><link name="y"/>
  <joint name="zeta" type="fixed"><parent link="root"/><child link="x"/></joint>
  <joint name="alpha" type="fixed"><parent link="root"/><child link="y"/></joint>
</robot>)";
  const UrdfParseResult res = parse_urdf(branched);
  REQUIRE(res.chain.njoints() == 2);
  CHECK(res.chain.joints[0].name == "alpha");
  CHECK(res.chain.joints[1].name == "zeta");
}

TEST_CASE("parse -> serialize -> parse is idempotent on the chain") {
  constexpr const char* doc = R"(
<robot name="round">
  <link name="base"/><link name="l1"/><link name="l2"/><link name="tool"/>
  <joint name="j1" type="revolute">
    <parent link="base"/><child link="l1"/>
    <origin xyz="0.1 -0.2 0.3" rpy="0.2 -0.4 1.1"/><axis xyz="0 0 1"/>
    <limit lower="-2" upper="2"/>
  </joint>
  <joint name="j2" type="prismatic">
    <parent link="l1"/><child link="l2"/>
    <origin xyz="1 0 0" rpy="0 0 0"/><axis xyz="0.5 0.5 0.7071067811865476"/>
    <limit lower="0" upper="0.5"/>
  </joint>
  <joint name="gripper_j" type="prismatic">
    <parent link="l2"/><child link="tool"/>
    <origin xyz="0 0.5 0" rpy="0 0 0"/><axis xyz="0 0 1"/>
  </joint>
</robot>)";
  const KinematicChain first = parse_urdf(doc).chain;
  const std::string serialized = serialize_urdf(first);
  const KinematicChain second = parse_urdf(serialized).chain;
  REQUIRE(second.njoints() == first.njoints());
  REQUIRE(second.links == first.links);
  for (std::size_t i = 0; i < first.njoints(); ++i) {
    const Joint& a = first.joints[i];
    const Joint& b = second.joints[i];
    CHECK(a.name == b.name);
    CHECK(a.kind == b.kind);
    CHECK(a.parent_link == b.parent_link);
    CHECK(a.child_link == b.child_link);
    CHECK((a.axis - b.axis).norm() < 1e-12);
    CHECK((a.origin.position - b.origin.position).norm() < 1e-12);
    CHECK(std::abs(a.origin.orientation.dot(b.origin.orientation)) ==
          doctest::Approx(1.0).epsilon(1e-12));
    // Plain equality also covers the infinite (absent) limits.
    CHECK((a.lower == b.lower || std::abs(a.lower - b.lower) < 1e-12));
    CHECK((a.upper == b.upper || std::abs(a.upper - b.upper) < 1e-12));
  }
}

TEST_CASE("chain summary json mentions every joint") {
  const std::string json = chain_to_json(parse_urdf(kPlanar2).chain);
  CHECK(json.find("\"a\"") != std::string::npos);
  CHECK(json.find("\"b\"") != std::string::npos);
  CHECK(json.find("revolute") != std::string::npos);
}

}  // namespace
}  // namespace chunkrt
