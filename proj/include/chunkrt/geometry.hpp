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

#ifndef CHUNKRT_GEOMETRY_HPP_
#define CHUNKRT_GEOMETRY_HPP_

#include <array>
#include <cmath>

namespace chunkrt {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
  Vec3 normalized() const;

  bool operator==(const Vec3&) const = default;
};

// Unit quaternion, scalar-first (w, x, y, z). Hamilton convention.
struct Quat {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static Quat identity() { return {1.0, 0.0, 0.0, 0.0}; }
  static Quat from_axis_angle(const Vec3& unit_axis, double angle);
  // URDF rpy: extrinsic (fixed-axis) XYZ, i.e. R = Rz(yaw) Ry(pitch) Rx(roll).
  static Quat from_rpy(double roll, double pitch, double yaw);

  Quat operator*(const Quat& o) const {
    return {w * o.w - x * o.x - y * o.y - z * o.z,
            w * o.x + x * o.w + y * o.z - z * o.y,
            w * o.y - x * o.z + y * o.w + z * o.x,
            w * o.z + x * o.y - y * o.x + z * o.w};
  }
  Quat conjugate() const { return {w, -x, -y, -z}; }
  double dot(const Quat& o) const { return w * o.w + x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
  Quat normalized() const;
  // Flips sign so w >= 0.
  Quat canonical() const { return w < 0.0 ? Quat{-w, -x, -y, -z} : *this; }
  Vec3 rotate(const Vec3& v) const;

  std::array<double, 4> wxyz() const { return {w, x, y, z}; }

  bool operator==(const Quat&) const = default;
};

// Rigid transform: rotate by `orientation`, then translate by `position`.
struct Pose {
  Vec3 position;
  Quat orientation;

  static Pose identity() { return {{0, 0, 0}, Quat::identity()}; }

  bool operator==(const Pose&) const = default;
};

// a then b applied in a's frame. Orientation is renormalized.
Pose compose(const Pose& a, const Pose& b);
Pose invert(const Pose& a);
Vec3 transform_point(const Pose& p, const Vec3& v);

inline bool approx_equal(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace chunkrt

#endif  // CHUNKRT_GEOMETRY_HPP_
