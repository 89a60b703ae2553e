// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>

#include "glosskit/common.hpp"
#include "glosskit/surfel.hpp"

namespace glosskit {

/// Pinhole camera, OpenCV axes (x right, y down, z forward).
/// x_cam = rotation * x_world + translation.
struct Camera {
  double fx = 1.0, fy = 1.0;
  double cx = 0.5, cy = 0.5;
  int width = 1, height = 1;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 center() const { return -rotation.transpose() * translation; }
  Vec3 forward() const { return rotation.row(2).transpose(); }
  Vec3 to_camera(const Vec3& world) const { return rotation * world + translation; }
  /// Continuous pixel coordinates of a world point (must be in front).
  Vec2 project(const Vec3& world) const;
  /// Camera-space point at pixel (px, py) with camera-z depth `depth`.
  Vec3 unproject(const Vec2& px, double depth) const;

  void validate() const;

  /// Camera at `eye` looking at `target`; `up` picks the roll. Field of view
  /// is vertical, in radians; pixels are square and the principal point is
  /// the image centre.
  static Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double fov_y,
                        int width, int height);
};

struct Ray {
  Vec3 origin;
  Vec3 direction;
  Vec3 at(double t) const { return origin + t * direction; }
};

/// World-space ray through continuous pixel coordinates. Pixel (cx, cy) is
/// the optical axis; pixel centres sit at integer + 0.5.
Ray pixel_ray(const Camera& cam, const Vec2& px);

struct PlaneHit {
  double u = 0.0, v = 0.0, t = 0.0;
};

inline constexpr double kParallelEps = 1e-9;

/// Intersection of a ray with the surfel's plane in local (u, v) units.
/// Tangents need not be orthonormal; the plane basis is inverted exactly.
template <class T>
bool ray_plane_uv(const Vec3& origin, const Vec3& dir, const Vec3T<T>& p, const Vec3T<T>& tu,
                  const Vec3T<T>& tv, const T& su, const T& sv, T& u, T& v, T& t) {
  using std::abs;
  const Vec3T<T> n = tu.cross(tv);
  const T nn = n.squaredNorm();
  const T denom = dir.cast<T>().dot(n);
  if (!(abs(value_of(denom)) >= kParallelEps * std::sqrt(value_of(nn)))) return false;
  t = (p - origin.cast<T>()).dot(n) / denom;
  if (!(value_of(t) > 0.0)) return false;
  const Vec3T<T> q = origin.cast<T>() + t * dir.cast<T>() - p;
  u = q.cross(tv).dot(n) / (nn * su);
  v = tu.cross(q).dot(n) / (nn * sv);
  return true;
}

std::optional<PlaneHit> ray_plane_uv(const Ray& ray, const Surfel& s);

}  // namespace glosskit
