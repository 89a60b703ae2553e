// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "glosskit/common.hpp"
#include "glosskit/lighting.hpp"
#include "glosskit/surfel.hpp"

namespace glosskit {

/// Isotropic spherical Gaussian mu * exp(lambda * (v . xi - 1)).
struct SgParams {
  Vec3 lobe_axis = Vec3::UnitZ();
  double sharpness = 1.0;
  double amplitude = 1.0;
};

/// Anisotropic spherical Gaussian c * max(v . z, 0) * exp(-l (v . x)^2 - m (v . y)^2).
struct AsgParams {
  Vec3 frame_x = Vec3::UnitX();
  Vec3 frame_y = Vec3::UnitY();
  Vec3 frame_z = Vec3::UnitZ();
  double sharp_x = 1.0;
  double sharp_y = 1.0;
  double amplitude = 1.0;
};

enum class NdfModel {
  WarpedAsg,    // ASG produced by warping the SG NDF into incident space
  IsotropicSg,  // the SG NDF in half-vector space, no warp
};

double eval_sg(const Vec3& dir, const SgParams& p);
Rgb eval_sg(const Vec3& dir, const Vec3& lobe_axis, double sharpness, const Rgb& amplitude);
double eval_asg(const Vec3& dir, const AsgParams& p);

/// SG normal distribution with sharpness 2/r^2 and amplitude 1/(pi r^2).
double ndf_iso(const Vec3& half, const Vec3& normal, double roughness);

/// Warped NDF lobe for a view direction. sharp_x is the base value
/// 2/(8 r^2); evaluation divides it by (w_i . n)^2 per incident direction.
AsgParams warp_asg(const Vec3& normal, const Vec3& view, double roughness);

/// Evaluates a lobe returned by warp_asg at an incident direction.
double eval_warped_ndf(const AsgParams& lobe, const Vec3& normal, const Vec3& wi);

/// Smith height-correlated masking-shadowing G2 for GGX with alpha = r^2.
double smith_g(double cos_i, double cos_o, double roughness);

/// Schlick Fresnel F0 + (1 - F0)(1 - cos)^5.
Rgb fresnel_schlick(const Rgb& f0, double cos_theta);

/// D F G / (4 (n . w_i)(n . w_o)); zero when either cosine is non-positive.
Rgb specular_brdf(const Vec3& wo, const Vec3& wi, const Vec3& normal, double roughness,
                  const Rgb& f0, NdfModel model = NdfModel::WarpedAsg);

/// Golden-angle spiral on the +z hemisphere with equal-area rings.
std::vector<Vec3> fibonacci_hemisphere(int count);

/// fibonacci_hemisphere(count) rotated so the pole lands on `normal`.
std::vector<Vec3> fibonacci_dirs(int count, const Vec3& normal);

struct ShadingOptions {
  int samples = 64;
  NdfModel ndf = NdfModel::WarpedAsg;
  bool diffuse_only = false;
};

/// Direct + indirect radiance arriving at a surfel along its quadrature
/// directions. Depends only on the surfel, the environment and visibility,
/// so a renderer builds it once per surfel and reuses it for every hit.
struct LightCache {
  Vec3 normal;
  Mat3 frame;                 // columns map the canonical hemisphere onto the normal
  std::vector<Vec3> dirs;     // world-space quadrature directions
  std::vector<Rgb> radiance;  // L_i along each direction
  std::vector<double> visibility;  // empty when unoccluded
};

LightCache build_light_cache(const Surfel& s, const EnvironmentMap& env,
                             std::span<const double> visibility_row, int samples,
                             BranchTrace* branch = nullptr);

/// c_d + c_s for a surfel seen along view direction wo (pointing away from
/// the surface). Empty visibility_row means unoccluded.
Rgb shade(const Surfel& s, const Vec3& wo, const EnvironmentMap& env,
          std::span<const double> visibility_row, const ShadingOptions& opts);

Rgb shade_cached(const Surfel& s, const LightCache& cache, const Vec3& wo,
                 const ShadingOptions& opts, BranchTrace* branch = nullptr);

// ---------------------------------------------------------------------------
// Templated kernels. Instantiated with double for rendering and with
// ceres::Jet for forward-mode derivatives in the backward pass.

inline constexpr double kCosClamp = 1e-4;

/// Minimal rotation taking +z onto the unit vector n.
template <class T>
Mat3T<T> rotation_to(const Vec3T<T>& n) {
  Mat3T<T> r;
  const T one_plus_c = 1.0 + n.z();
  if (value_of(one_plus_c) < 1e-8) {
    r << T(1.0), T(0.0), T(0.0), T(0.0), T(-1.0), T(0.0), T(0.0), T(0.0), T(-1.0);
    return r;
  }
  const T k = 1.0 / one_plus_c;
  r(0, 0) = 1.0 - n.x() * n.x() * k;
  r(0, 1) = -n.x() * n.y() * k;
  r(0, 2) = n.x();
  r(1, 0) = -n.x() * n.y() * k;
  r(1, 1) = 1.0 - n.y() * n.y() * k;
  r(1, 2) = n.y();
  r(2, 0) = -n.x();
  r(2, 1) = -n.y();
  r(2, 2) = n.z();
  return r;
}

template <class T>
T smith_lambda(const T& cos_theta, const T& alpha) {
  using std::sqrt;
  const T c2 = cos_theta * cos_theta;
  const T tan2 = (1.0 - c2) / c2;
  return (sqrt(1.0 + alpha * alpha * tan2) - 1.0) * 0.5;
}

/// Per-view part of the specular lobe: everything that does not depend on
/// the incident direction.
template <class T>
struct SpecularLobe {
  NdfModel model = NdfModel::WarpedAsg;
  Vec3T<T> n;
  Vec3 wo;
  T cos_o;  // clamped at kCosClamp
  T alpha;  // GGX alpha = r^2
  T lambda_o;
  T amplitude;
  T sharpness;  // 2/(8 r^2) for the warped ASG, 2/r^2 for the SG
  Vec3T<T> x, y, z;
};

template <class T>
SpecularLobe<T> make_lobe(const Vec3T<T>& n, const Vec3& wo, const T& roughness, NdfModel model,
                          BranchTrace* branch = nullptr) {
  using std::sqrt;
  SpecularLobe<T> lobe;
  lobe.model = model;
  lobe.n = n;
  lobe.wo = wo;
  const Vec3T<T> wo_t = wo.template cast<T>();
  const T no = n.dot(wo_t);
  const bool clamped = value_of(no) < kCosClamp;
  trace(branch, clamped ? 0x11 : 0x12);
  lobe.cos_o = clamped ? T(kCosClamp) : no;
  const T r2 = roughness * roughness;
  lobe.alpha = r2;
  lobe.lambda_o = smith_lambda(lobe.cos_o, lobe.alpha);
  lobe.amplitude = 1.0 / (kPi * r2);
  if (model == NdfModel::IsotropicSg) {
    lobe.sharpness = 2.0 / r2;
    return lobe;
  }
  lobe.sharpness = 2.0 / (8.0 * r2);
  lobe.z = 2.0 * no * n - wo_t;
  Vec3T<T> x = n.cross(lobe.z);
  const bool degenerate = value_of(x.squaredNorm()) < 1e-18;
  trace(branch, degenerate ? 0x13 : 0x14);
  if (degenerate) {
    // Reflection coincides with the normal: any tangent will do. Project the
    // axis along the smallest normal component.
    const Vec3 nv = value_of(n);
    int axis = 0;
    if (std::abs(nv.y()) < std::abs(nv[axis])) axis = 1;
    if (std::abs(nv.z()) < std::abs(nv[axis])) axis = 2;
    Vec3T<T> a(T(0.0), T(0.0), T(0.0));
    a[axis] = T(1.0);
    x = a - a.dot(n) * n;
  }
  lobe.x = x / x.norm();
  lobe.y = lobe.z.cross(lobe.x);
  return lobe;
}

template <class T>
struct LobeSample {
  T ndf;      // D
  T g;        // Smith G2
  T cos_i;    // unclamped n . w_i
  T weight;   // D G cos_i / (4 cos_i' cos_o'), the cosine-weighted BRDF without F
  T schlick;  // (1 - w_o . h)^5
};

template <class T>
LobeSample<T> lobe_sample(const SpecularLobe<T>& lobe, const Vec3T<T>& wi,
                          BranchTrace* branch = nullptr) {
  using std::exp;
  using std::pow;
  LobeSample<T> s{T(0.0), T(0.0), T(0.0), T(0.0), T(0.0)};
  s.cos_i = lobe.n.dot(wi);
  if (value_of(s.cos_i) <= 0.0) {
    trace(branch, 0x21);
    return s;
  }
  const bool clamped = value_of(s.cos_i) < kCosClamp;
  const T ci = clamped ? T(kCosClamp) : s.cos_i;
  const Vec3T<T> wo_t = lobe.wo.template cast<T>();
  const Vec3T<T> hsum = wi + wo_t;
  const T hnorm = hsum.norm();
  if (lobe.model == NdfModel::IsotropicSg) {
    const Vec3T<T> h = hsum / hnorm;
    s.ndf = lobe.amplitude * exp(lobe.sharpness * (h.dot(lobe.n) - 1.0));
    trace(branch, clamped ? 0x22 : 0x23);
  } else {
    const T smooth = wi.dot(lobe.z);
    const bool lower = value_of(smooth) <= 0.0;
    trace(branch, (clamped ? 0x24 : 0x25) ^ (lower ? 0x100 : 0));
    if (!lower) {
      const T px = wi.dot(lobe.x);
      const T py = wi.dot(lobe.y);
      s.ndf = lobe.amplitude * smooth *
              exp(-lobe.sharpness / (ci * ci) * px * px - lobe.sharpness * py * py);
    }
  }
  s.g = 1.0 / (1.0 + lobe.lambda_o + smith_lambda(ci, lobe.alpha));
  s.weight = s.ndf * s.g * s.cos_i / (4.0 * ci * lobe.cos_o);
  // w_o . h lies in [0, 1] for unit vectors; (1 - c)^5 written out for Jets.
  const T c = wo_t.dot(hsum) / hnorm;
  const T m = 1.0 - c;
  const T m2 = m * m;
  s.schlick = m2 * m2 * m;
  return s;
}

template <class T>
Vec3T<T> eval_asg_t(const Vec3T<T>& dir, const Vec3T<T>& x, const Vec3T<T>& y,
                    const Vec3T<T>& z, const T& sharp_x, const T& sharp_y, const T& amplitude) {
  using std::exp;
  const T s = dir.dot(z);
  if (value_of(s) <= 0.0) return Vec3T<T>::Zero();
  const T px = dir.dot(x), py = dir.dot(y);
  const T v = amplitude * s * exp(-sharp_x * px * px - sharp_y * py * py);
  return Vec3T<T>(v, v, v);
}

}  // namespace glosskit
