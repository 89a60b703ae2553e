// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "glosskit/surfel.hpp"

#include <cmath>

namespace glosskit {

Mat4 local_to_world(const Surfel& s) {
  Mat4 h = Mat4::Zero();
  h.block<3, 1>(0, 0) = s.scale_u * s.tangent_u;
  h.block<3, 1>(0, 1) = s.scale_v * s.tangent_v;
  h.block<3, 1>(0, 3) = s.position;
  h(3, 3) = 1.0;
  return h;
}

Vec3 normal_of(const Surfel& s) { return normal_of<double>(s.tangent_u, s.tangent_v); }

Vec2 world_to_local(const Surfel& s, const Vec3& point) {
  // Solves q = a*t_u + b*t_v in the least-squares sense; exact for in-plane q.
  const Vec3 q = point - s.position;
  const Vec3 n = s.tangent_u.cross(s.tangent_v);
  const double nn = n.squaredNorm();
  const double a = q.cross(s.tangent_v).dot(n) / nn;
  const double b = s.tangent_u.cross(q).dot(n) / nn;
  return {a / s.scale_u, b / s.scale_v};
}

double eval_kernel(double u, double v) { return std::exp(-(u * u + v * v) * 0.5); }

void orthonormalize_tangents(Surfel& s) {
  s.tangent_u.normalize();
  s.tangent_v -= s.tangent_v.dot(s.tangent_u) * s.tangent_u;
  s.tangent_v.normalize();
}

void validate(const Surfel& s) {
  constexpr double kTol = 1e-6;
  if (std::abs(s.tangent_u.norm() - 1.0) > kTol) throw Error("surfel: tangent_u is not unit length");
  if (std::abs(s.tangent_v.norm() - 1.0) > kTol) throw Error("surfel: tangent_v is not unit length");
  if (std::abs(s.tangent_u.dot(s.tangent_v)) > kTol) throw Error("surfel: tangents are not orthogonal");
  if (!(s.scale_u > 0.0) || !(s.scale_v > 0.0)) throw Error("surfel: scales must be positive");
  if (!(s.opacity >= 0.0 && s.opacity <= 1.0)) throw Error("surfel: opacity outside [0,1]");
  if (!(s.roughness > 0.0 && s.roughness <= 1.0)) throw Error("surfel: roughness outside (0,1]");
  if ((s.specular_reflectance < 0.0).any() || (s.specular_reflectance > 1.0).any())
    throw Error("surfel: specular_reflectance outside [0,1]");
}

}  // namespace glosskit
