// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>

#include "glosskit/common.hpp"

namespace glosskit {

inline constexpr int kDiffuseShDegree = 3;
inline constexpr int kDiffuseShCoeffs = 16;
inline constexpr int kIndirectShDegree = 2;
inline constexpr int kIndirectShCoeffs = 9;

/// A flat Gaussian primitive living in the plane spanned by its tangents.
///
/// SH coefficients are stored coefficient-major with one RGB triple per
/// basis function.
struct Surfel {
  Vec3 position = Vec3::Zero();
  Vec3 tangent_u = Vec3::UnitX();
  Vec3 tangent_v = Vec3::UnitY();
  double scale_u = 1.0;
  double scale_v = 1.0;
  double opacity = 1.0;
  double roughness = 0.5;
  Rgb specular_reflectance = Rgb::Constant(0.04);
  std::array<Rgb, kDiffuseShCoeffs> diffuse_sh = zero_coeffs<kDiffuseShCoeffs>();
  std::array<Rgb, kIndirectShCoeffs> indirect_sh = zero_coeffs<kIndirectShCoeffs>();

  template <int N>
  static std::array<Rgb, N> zero_coeffs() {
    std::array<Rgb, N> c;
    c.fill(Rgb::Zero());
    return c;
  }
};

/// Homogeneous plane-to-world transform; maps (u, v, 1, 1) to P(u, v).
Mat4 local_to_world(const Surfel& s);

/// Unit normal, normalize(tangent_u x tangent_v).
Vec3 normal_of(const Surfel& s);

/// Inverse of the plane parameterization for a point on (or projected onto)
/// the surfel plane.
Vec2 world_to_local(const Surfel& s, const Vec3& point);

/// Standard 2D Gaussian exp(-(u^2 + v^2) / 2).
double eval_kernel(double u, double v);

/// Gram-Schmidt of tangent_v against tangent_u, then renormalization of both.
void orthonormalize_tangents(Surfel& s);

/// Checks the documented field invariants; throws Error naming the field.
void validate(const Surfel& s);

template <class T>
Vec3T<T> normal_of(const Vec3T<T>& tu, const Vec3T<T>& tv) {
  Vec3T<T> n = tu.cross(tv);
  return n / n.norm();
}

template <class T>
T eval_kernel(const T& u, const T& v) {
  using std::exp;
  return exp(-(u * u + v * v) * 0.5);
}

}  // namespace glosskit
