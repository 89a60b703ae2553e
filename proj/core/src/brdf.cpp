// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "glosskit/brdf.hpp"

#include "glosskit/sh.hpp"

namespace glosskit {

double eval_sg(const Vec3& dir, const SgParams& p) {
  return p.amplitude * std::exp(p.sharpness * (dir.dot(p.lobe_axis) - 1.0));
}

Rgb eval_sg(const Vec3& dir, const Vec3& lobe_axis, double sharpness, const Rgb& amplitude) {
  return amplitude * std::exp(sharpness * (dir.dot(lobe_axis) - 1.0));
}

double eval_asg(const Vec3& dir, const AsgParams& p) {
  const double s = dir.dot(p.frame_z);
  if (s <= 0.0) return 0.0;
  const double px = dir.dot(p.frame_x);
  const double py = dir.dot(p.frame_y);
  return p.amplitude * s * std::exp(-p.sharp_x * px * px - p.sharp_y * py * py);
}

double ndf_iso(const Vec3& half, const Vec3& normal, double roughness) {
  if (!(roughness > 0.0)) throw Error("ndf_iso: roughness must be positive");
  const double r2 = roughness * roughness;
  return eval_sg(half, SgParams{normal, 2.0 / r2, 1.0 / (kPi * r2)});
}

AsgParams warp_asg(const Vec3& normal, const Vec3& view, double roughness) {
  if (!(roughness > 0.0)) throw Error("warp_asg: roughness must be positive");
  if (!(view.dot(normal) > 0.0)) throw Error("warp_asg: view direction is back-facing");
  const SpecularLobe<double> lobe =
      make_lobe<double>(normal, view, roughness, NdfModel::WarpedAsg);
  AsgParams p;
  p.frame_x = lobe.x;
  p.frame_y = lobe.y;
  p.frame_z = lobe.z;
  p.sharp_x = lobe.sharpness;
  p.sharp_y = lobe.sharpness;
  p.amplitude = lobe.amplitude;
  return p;
}

double eval_warped_ndf(const AsgParams& lobe, const Vec3& normal, const Vec3& wi) {
  const double c = std::max(wi.dot(normal), kCosClamp);
  AsgParams p = lobe;
  p.sharp_x = lobe.sharp_x / (c * c);
  return eval_asg(wi, p);
}

double smith_g(double cos_i, double cos_o, double roughness) {
  const double a = roughness * roughness;
  const double ci = std::max(cos_i, kCosClamp);
  const double co = std::max(cos_o, kCosClamp);
  return 1.0 / (1.0 + smith_lambda(ci, a) + smith_lambda(co, a));
}

Rgb fresnel_schlick(const Rgb& f0, double cos_theta) {
  const double m = 1.0 - std::clamp(cos_theta, 0.0, 1.0);
  return f0 + (1.0 - f0) * (m * m * m * m * m);
}

Rgb specular_brdf(const Vec3& wo, const Vec3& wi, const Vec3& normal, double roughness,
                  const Rgb& f0, NdfModel model) {
  if (!(roughness > 0.0)) throw Error("specular_brdf: roughness must be positive");
  if (wo.dot(normal) <= 0.0 || wi.dot(normal) <= 0.0) return Rgb::Zero();
  const SpecularLobe<double> lobe = make_lobe<double>(normal, wo, roughness, model);
  const LobeSample<double> s = lobe_sample<double>(lobe, wi);
  const double ci = std::max(s.cos_i, kCosClamp);
  const Rgb fresnel = f0 + (1.0 - f0) * s.schlick;
  return fresnel * (s.ndf * s.g / (4.0 * ci * lobe.cos_o));
}

std::vector<Vec3> fibonacci_hemisphere(int count) {
  if (count < 1) throw Error("fibonacci_dirs: count must be at least 1");
  const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
  std::vector<Vec3> dirs(count);
  for (int k = 0; k < count; ++k) {
    const double z = 1.0 - (k + 0.5) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * k;
    dirs[k] = Vec3(r * std::cos(phi), r * std::sin(phi), z);
  }
  return dirs;
}

std::vector<Vec3> fibonacci_dirs(int count, const Vec3& normal) {
  std::vector<Vec3> dirs = fibonacci_hemisphere(count);
  const Mat3 rot = rotation_to<double>(normal.normalized());
  for (Vec3& d : dirs) d = rot * d;
  return dirs;
}

LightCache build_light_cache(const Surfel& s, const EnvironmentMap& env,
                             std::span<const double> visibility_row, int samples,
                             BranchTrace* branch) {
  if (!visibility_row.empty() && static_cast<int>(visibility_row.size()) != samples)
    throw Error("shade: visibility row length does not match the sample count");
  LightCache cache;
  cache.normal = normal_of(s);
  cache.frame = rotation_to<double>(cache.normal);
  cache.dirs = fibonacci_hemisphere(samples);
  cache.radiance.resize(samples);
  cache.visibility.assign(visibility_row.begin(), visibility_row.end());
  const std::span<const Rgb> indirect(s.indirect_sh);
  for (int k = 0; k < samples; ++k) {
    Vec3& d = cache.dirs[k];
    d = cache.frame * d;
    const double vis = visibility_row.empty() ? 1.0 : visibility_row[k];
    const Rgb direct = gather(env, env_taps<double>(d, branch)).array();
    const Rgb ind = eval_sh(indirect, d);
    for (int c = 0; c < 3; ++c) trace(branch, ind[c] > 0.0 ? 0x31 : 0x32);
    cache.radiance[k] = vis * direct + ind.max(0.0);
  }
  return cache;
}

Rgb shade_cached(const Surfel& s, const LightCache& cache, const Vec3& wo,
                 const ShadingOptions& opts, BranchTrace* branch) {
  const Rgb raw = eval_sh(std::span<const Rgb>(s.diffuse_sh), wo);
  for (int c = 0; c < 3; ++c) trace(branch, raw[c] > 0.0 ? 0x41 : 0x42);
  Rgb color = raw.max(0.0);
  const bool front = wo.dot(cache.normal) > 0.0;
  trace(branch, front ? 0x43 : 0x44);
  if (opts.diffuse_only || !front) return color;

  const SpecularLobe<double> lobe =
      make_lobe<double>(cache.normal, wo, s.roughness, opts.ndf, branch);
  const Rgb& f0 = s.specular_reflectance;
  Rgb spec = Rgb::Zero();
  const int n = static_cast<int>(cache.dirs.size());
  for (int k = 0; k < n; ++k) {
    const LobeSample<double> ls = lobe_sample<double>(lobe, cache.dirs[k], branch);
    if (ls.weight == 0.0) continue;
    spec += ls.weight * (f0 + (1.0 - f0) * ls.schlick) * cache.radiance[k];
  }
  return color + spec * (2.0 * kPi / n);
}

Rgb shade(const Surfel& s, const Vec3& wo, const EnvironmentMap& env,
          std::span<const double> visibility_row, const ShadingOptions& opts) {
  const LightCache cache = build_light_cache(s, env, visibility_row, opts.samples);
  return shade_cached(s, cache, wo, opts);
}

}  // namespace glosskit
