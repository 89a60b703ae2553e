// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "glosskit/camera.hpp"

#include <cmath>
#include <string>

namespace glosskit {

Vec2 Camera::project(const Vec3& world) const {
  const Vec3 c = to_camera(world);
  return {fx * c.x() / c.z() + cx, fy * c.y() / c.z() + cy};
}

Vec3 Camera::unproject(const Vec2& px, double depth) const {
  return {(px.x() - cx) / fx * depth, (px.y() - cy) / fy * depth, depth};
}

void Camera::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw Error("camera: focal lengths must be positive");
  if (width <= 0 || height <= 0) throw Error("camera: image size must be positive");
  const Mat3 rrt = rotation * rotation.transpose();
  if ((rrt - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6 ||
      std::abs(rotation.determinant() - 1.0) > 1e-6)
    throw Error("camera: rotation is not a proper rotation");
}

Camera Camera::look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double fov_y,
                       int width, int height) {
  const Vec3 f = (target - eye).normalized();
  Vec3 r = f.cross(up);
  if (r.norm() < 1e-12) throw Error("camera: up vector is parallel to the view direction");
  r.normalize();
  const Vec3 d = f.cross(r);
  Camera cam;
  cam.width = width;
  cam.height = height;
  cam.fy = 0.5 * height / std::tan(0.5 * fov_y);
  cam.fx = cam.fy;
  cam.cx = 0.5 * width;
  cam.cy = 0.5 * height;
  cam.rotation.row(0) = r.transpose();
  cam.rotation.row(1) = d.transpose();
  cam.rotation.row(2) = f.transpose();
  cam.translation = -cam.rotation * eye;
  return cam;
}

Ray pixel_ray(const Camera& cam, const Vec2& px) {
  if (!(px.x() >= 0.0 && px.x() < cam.width && px.y() >= 0.0 && px.y() < cam.height))
    throw Error("pixel_ray: pixel (" + std::to_string(px.x()) + ", " + std::to_string(px.y()) +
                ") outside the image");
  const Vec3 d_cam((px.x() - cam.cx) / cam.fx, (px.y() - cam.cy) / cam.fy, 1.0);
  return {cam.center(), (cam.rotation.transpose() * d_cam).normalized()};
}

std::optional<PlaneHit> ray_plane_uv(const Ray& ray, const Surfel& s) {
  PlaneHit hit;
  if (!ray_plane_uv<double>(ray.origin, ray.direction, s.position, s.tangent_u, s.tangent_v,
                            s.scale_u, s.scale_v, hit.u, hit.v, hit.t))
    return std::nullopt;
  return hit;
}

}  // namespace glosskit
