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

#include "chunkrt/geometry.hpp"

#include "chunkrt/errors.hpp"

namespace chunkrt {

Vec3 Vec3::normalized() const {
  const double n = norm();
  if (n < 1e-12) throw DegenerateQuaternion("cannot normalize near-zero vector");
  return {x / n, y / n, z / n};
}

Quat Quat::from_axis_angle(const Vec3& unit_axis, double angle) {
  const double h = 0.5 * angle;
  const double s = std::sin(h);
  return {std::cos(h), unit_axis.x * s, unit_axis.y * s, unit_axis.z * s};
}

Quat Quat::from_rpy(double roll, double pitch, double yaw) {
  const Quat qx = from_axis_angle({1, 0, 0}, roll);
  const Quat qy = from_axis_angle({0, 1, 0}, pitch);
  const Quat qz = from_axis_angle({0, 0, 1}, yaw);
  return (qz * qy * qx).normalized();
}

Quat Quat::normalized() const {
  const double n = norm();
  if (n < 1e-12) throw DegenerateQuaternion("cannot normalize near-zero quaternion");
  return {w / n, x / n, y / n, z / n};
}

Vec3 Quat::rotate(const Vec3& v) const {
  // v' = v + 2 u x (u x v + w v), u = (x, y, z)
  const Vec3 u{x, y, z};
  const Vec3 t = u.cross(v) * 2.0;
  return v + t * w + u.cross(t);
}

Pose compose(const Pose& a, const Pose& b) {
  Pose out;
  out.position = a.position + a.orientation.rotate(b.position);
  out.orientation = (a.orientation * b.orientation).normalized();
  return out;
}

Pose invert(const Pose& a) {
  Pose out;
  out.orientation = a.orientation.conjugate();
  out.position = -out.orientation.rotate(a.position);
  return out;
}

Vec3 transform_point(const Pose& p, const Vec3& v) {
  return p.orientation.rotate(v) + p.position;
}

}  // namespace chunkrt
