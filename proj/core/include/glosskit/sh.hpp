// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "glosskit/common.hpp"

namespace glosskit {

/// Number of real SH basis functions up to and including `degree`.
constexpr int sh_count(int degree) { return (degree + 1) * (degree + 1); }

/// Real orthonormal SH basis (3D-GS sign convention), degree <= 3.
/// Writes sh_count(degree) values into `out`.
template <class T>
void sh_basis(int degree, const Vec3T<T>& d, T* out) {
  constexpr double c0 = 0.28209479177387814;
  constexpr double c1 = 0.4886025119029199;
  constexpr double c2[] = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005,
                           -1.0925484305920792, 0.5462742152960396};
  constexpr double c3[] = {-0.5900435899266435, 2.890611442640554, -0.4570457994644658,
                           0.3731763325901154,  -0.4570457994644658, 1.445305721320277,
                           -0.5900435899266435};
  out[0] = T(c0);
  if (degree < 1) return;
  const T& x = d.x();
  const T& y = d.y();
  const T& z = d.z();
  out[1] = -c1 * y;
  out[2] = c1 * z;
  out[3] = -c1 * x;
  if (degree < 2) return;
  const T xx = x * x, yy = y * y, zz = z * z;
  out[4] = c2[0] * x * y;
  out[5] = c2[1] * y * z;
  out[6] = c2[2] * (2.0 * zz - xx - yy);
  out[7] = c2[3] * x * z;
  out[8] = c2[4] * (xx - yy);
  if (degree < 3) return;
  out[9] = c3[0] * y * (3.0 * xx - yy);
  out[10] = c3[1] * x * y * z;
  out[11] = c3[2] * y * (4.0 * zz - xx - yy);
  out[12] = c3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
  out[13] = c3[4] * x * (4.0 * zz - xx - yy);
  out[14] = c3[5] * z * (xx - yy);
  out[15] = c3[6] * x * (xx - 3.0 * yy);
}

/// Degree implied by a coefficient count; throws for counts that are not a
/// perfect square in [1, 16].
int sh_degree_for(std::size_t count);

/// Contracts one coefficient per basis function; degree comes from the span
/// length.
double eval_sh(std::span<const double> coeffs, const Vec3& dir);
Rgb eval_sh(std::span<const Rgb> coeffs, const Vec3& dir);

template <class T>
Vec3T<T> eval_sh_rgb(std::span<const Rgb> coeffs, const Vec3T<T>& dir) {
  T basis[16];
  sh_basis<T>(sh_degree_for(coeffs.size()), dir, basis);
  Vec3T<T> out(T(0.0), T(0.0), T(0.0));
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    out.x() += coeffs[i][0] * basis[i];
    out.y() += coeffs[i][1] * basis[i];
    out.z() += coeffs[i][2] * basis[i];
  }
  return out;
}

}  // namespace glosskit
