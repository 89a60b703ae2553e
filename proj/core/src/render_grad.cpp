// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "glosskit/render_grad.hpp"

#include <algorithm>

#include "glosskit/parallel.hpp"
#include "glosskit/sh.hpp"

namespace glosskit {

SurfelGrad& SurfelGrad::operator+=(const SurfelGrad& o) {
  position += o.position;
  tangent_u += o.tangent_u;
  tangent_v += o.tangent_v;
  scale_u += o.scale_u;
  scale_v += o.scale_v;
  opacity += o.opacity;
  roughness += o.roughness;
  specular_reflectance += o.specular_reflectance;
  for (int j = 0; j < kDiffuseShCoeffs; ++j) diffuse_sh[j] += o.diffuse_sh[j];
  for (int j = 0; j < kIndirectShCoeffs; ++j) indirect_sh[j] += o.indirect_sh[j];
  return *this;
}

namespace {

using Jet4 = ceres::Jet<double, 4>;
using Jet3 = ceres::Jet<double, 3>;
using Jet6 = ceres::Jet<double, 6>;
using Jet11 = ceres::Jet<double, 11>;

// Per-surfel accumulators that only the backward pass needs.
struct SurfelAdjoint {
  SurfelGrad grad;
  Vec3 normal = Vec3::Zero();   // dL/d unit normal
  std::vector<Rgb> radiance;    // dL/d L_i per quadrature direction
};

void add_diffuse_grad(const Surfel& s, const Vec3& wo, const Rgb& g, SurfelGrad& out) {
  double basis[kDiffuseShCoeffs];
  sh_basis<double>(kDiffuseShDegree, wo, basis);
  const Rgb raw = eval_sh(std::span<const Rgb>(s.diffuse_sh), wo);
  Rgb gated = g;
  for (int c = 0; c < 3; ++c)
    if (!(raw[c] > 0.0)) gated[c] = 0.0;
  for (int j = 0; j < kDiffuseShCoeffs; ++j) out.diffuse_sh[j] += basis[j] * gated;
}

// Adjoint of the specular quadrature for one shaded hit.
void add_specular_grad(const Surfel& s, const LightCache& cache, const Vec3& wo,
                       const ShadingOptions& opts, const Rgb& g, SurfelAdjoint& adj) {
  const int n_dirs = static_cast<int>(cache.dirs.size());
  const double weight = 2.0 * kPi / n_dirs;
  Vec3T<Jet4> n;
  for (int a = 0; a < 3; ++a) n[a] = Jet4(cache.normal[a], a);
  const Jet4 r(s.roughness, 3);
  const SpecularLobe<Jet4> lobe = make_lobe<Jet4>(n, wo, r, opts.ndf);
  const Mat3T<Jet4> frame = rotation_to<Jet4>(n);
  const std::vector<Vec3> canonical = fibonacci_hemisphere(n_dirs);
  const Rgb& f0 = s.specular_reflectance;
  Jet4 acc(0.0);
  Rgb grad_f0 = Rgb::Zero();
  for (int k = 0; k < n_dirs; ++k) {
    const Vec3T<Jet4> wi = frame * canonical[k].cast<Jet4>();
    const LobeSample<Jet4> ls = lobe_sample<Jet4>(lobe, wi);
    if (ls.weight.a == 0.0 && ls.weight.v.isZero(0.0)) continue;
    const Rgb& radiance = cache.radiance[k];
    Jet4 term(0.0);
    Rgb fresnel;
    for (int c = 0; c < 3; ++c) {
      const Jet4 fc = f0[c] + (1.0 - f0[c]) * ls.schlick;
      fresnel[c] = fc.a;
      term += (g[c] * radiance[c]) * fc;
    }
    acc += ls.weight * term;
    grad_f0 += g * ls.weight.a * (1.0 - ls.schlick.a) * radiance;
    adj.radiance[k] += weight * ls.weight.a * fresnel * g;
  }
  adj.normal += weight * acc.v.head<3>();
  adj.grad.roughness += weight * acc.v[3];
  adj.grad.specular_reflectance += weight * grad_f0;
}

// Adjoint of the light cache: radiance adjoints flow to the environment map,
// the indirect SH and (through the rotated directions) the normal.
void light_cache_backward(const Surfel& s, const LightCache& cache, const EnvironmentMap& env,
                          std::span<const double> visibility_row, SurfelAdjoint& adj,
                          std::span<Rgb> env_grad) {
  const int n_dirs = static_cast<int>(cache.dirs.size());
  if (n_dirs == 0) return;
  const std::vector<Vec3> canonical = fibonacci_hemisphere(n_dirs);
  Vec3T<Jet3> n;
  for (int a = 0; a < 3; ++a) n[a] = Jet3(cache.normal[a], a);
  const Mat3T<Jet3> frame = rotation_to<Jet3>(n);
  const std::span<const Rgb> indirect(s.indirect_sh);
  Jet3 acc(0.0);
  for (int k = 0; k < n_dirs; ++k) {
    const Rgb& g = adj.radiance[k];
    if ((g == 0.0).all()) continue;
    const double vis = visibility_row.empty() ? 1.0 : visibility_row[k];
    const Vec3T<Jet3> wi = frame * canonical[k].cast<Jet3>();
    const EnvTaps<Jet3> taps = env_taps<Jet3>(wi);
    const Vec3T<Jet3> direct = gather(env, taps);
    const Vec3T<Jet3> ind = eval_sh_rgb<Jet3>(indirect, wi);

    EnvTaps<double> taps_d;
    taps_d.index = taps.index;
    taps_d.pole_row = taps.pole_row;
    for (int t = 0; t < 4; ++t) taps_d.weight[t] = taps.weight[t].a;
    scatter(taps_d, vis * g, env_grad);

    double basis[kIndirectShCoeffs];
    sh_basis<double>(kIndirectShDegree, cache.dirs[k], basis);
    Rgb gated = g;
    for (int c = 0; c < 3; ++c)
      if (!(ind[c].a > 0.0)) gated[c] = 0.0;
    for (int j = 0; j < kIndirectShCoeffs; ++j) adj.grad.indirect_sh[j] += basis[j] * gated;

    for (int c = 0; c < 3; ++c) {
      acc += (g[c] * vis) * direct[c];
      if (ind[c].a > 0.0) acc += gated[c] * ind[c];
    }
  }
  adj.normal += acc.v;
}

// d(u, v, t)/d(position, tangents, scales) for one hit; accumulates the
// chained gradient.
void plane_hit_backward(const Surfel& s, const Ray& ray, double g_u, double g_v, double g_t,
                        SurfelGrad& out) {
  Vec3T<Jet11> p, tu, tv;
  for (int a = 0; a < 3; ++a) {
    p[a] = Jet11(s.position[a], a);
    tu[a] = Jet11(s.tangent_u[a], 3 + a);
    tv[a] = Jet11(s.tangent_v[a], 6 + a);
  }
  const Jet11 su(s.scale_u, 9), sv(s.scale_v, 10);
  Jet11 u, v, t;
  if (!ray_plane_uv<Jet11>(ray.origin, ray.direction, p, tu, tv, su, sv, u, v, t)) return;
  const Eigen::Matrix<double, 11, 1> d = g_u * u.v + g_v * v.v + g_t * t.v;
  out.position += d.segment<3>(0);
  out.tangent_u += d.segment<3>(3);
  out.tangent_v += d.segment<3>(6);
  out.scale_u += d[9];
  out.scale_v += d[10];
}

}  // namespace

void normal_to_tangents(const Surfel& s, const Vec3& grad_normal, SurfelGrad& out) {
  if (grad_normal.isZero(0.0)) return;
  Vec3T<Jet6> tu, tv;
  for (int a = 0; a < 3; ++a) {
    tu[a] = Jet6(s.tangent_u[a], a);
    tv[a] = Jet6(s.tangent_v[a], 3 + a);
  }
  const Vec3T<Jet6> n = normal_of<Jet6>(tu, tv);
  Eigen::Matrix<double, 6, 1> d = Eigen::Matrix<double, 6, 1>::Zero();
  for (int a = 0; a < 3; ++a) d += grad_normal[a] * n[a].v;
  out.tangent_u += d.head<3>();
  out.tangent_v += d.tail<3>();
}

void render_backward(const Scene& scene, const RenderTape& tape, const BufferGrad& upstream,
                     SceneGrad& grad) {
  const std::span<const Surfel> surfels(scene.surfels);
  const int n_surfels = static_cast<int>(surfels.size());
  if (grad.surfels.size() != surfels.size()) grad.surfels.assign(n_surfels, SurfelGrad{});
  const Camera& cam = tape.camera;
  const ShadingOptions& shading = tape.options.shading;
  const int width = cam.width;
  const int height = cam.height;
  const Vec3 forward = cam.forward();
  const int samples = shading.diffuse_only ? 0 : shading.samples;

  constexpr int kRowsPerChunk = 16;
  const int chunks = (height + kRowsPerChunk - 1) / kRowsPerChunk;
  std::vector<std::vector<SurfelAdjoint>> chunk_adj(chunks);

  parallel_chunks(chunks, tape.options.threads, [&](int chunk) {
    std::vector<SurfelAdjoint>& adj = chunk_adj[chunk];
    adj.resize(n_surfels);
    for (SurfelAdjoint& a : adj) a.radiance.assign(samples, Rgb::Zero());
    const int y0 = chunk * kRowsPerChunk;
    const int y1 = std::min(height, y0 + kRowsPerChunk);
    std::vector<double> trans, suffix_p;
    std::vector<Eigen::Matrix<double, 7, 1>> feat, suffix_s;
    for (int y = y0; y < y1; ++y)
      for (int x = 0; x < width; ++x) {
        const int pix = y * width + x;
        const std::size_t begin = tape.offsets[pix];
        const std::size_t end = tape.offsets[pix + 1];
        const int m = static_cast<int>(end - begin);
        if (m == 0) continue;
        const Ray ray = pixel_ray(cam, Vec2(x + 0.5, y + 0.5));
        const Vec3 wo = -ray.direction;
        const double depth_scale = ray.direction.dot(forward);
        Eigen::Matrix<double, 7, 1> g;
        g << upstream.color[pix][0], upstream.color[pix][1], upstream.color[pix][2],
            upstream.depth[pix], upstream.normal[pix];
        const double g_opacity = upstream.opacity[pix];

        trans.assign(m, 1.0);
        feat.resize(m);
        for (int i = 0; i < m; ++i) {
          const TapeHit& h = tape.hits[begin + i];
          if (i > 0) trans[i] = trans[i - 1] * (1.0 - tape.hits[begin + i - 1].alpha);
          feat[i] << h.color[0], h.color[1], h.color[2], h.t * depth_scale,
              h.orient * tape.caches[h.surfel].normal;
        }
        suffix_s.assign(m, Eigen::Matrix<double, 7, 1>::Zero());
        suffix_p.assign(m, 1.0);
        for (int i = m - 2; i >= 0; --i) {
          const double a_next = tape.hits[begin + i + 1].alpha;
          suffix_s[i] = a_next * feat[i + 1] + (1.0 - a_next) * suffix_s[i + 1];
          suffix_p[i] = (1.0 - a_next) * suffix_p[i + 1];
        }

        for (int i = 0; i < m; ++i) {
          const TapeHit& h = tape.hits[begin + i];
          const Surfel& s = surfels[h.surfel];
          SurfelAdjoint& a = adj[h.surfel];
          const double w = trans[i] * h.alpha;
          const double g_alpha =
              trans[i] * g.dot(feat[i] - suffix_s[i]) + g_opacity * trans[i] * suffix_p[i];

          const Rgb g_color = w * g.head<3>().array();
          add_diffuse_grad(s, wo, g_color, a.grad);
          if (!shading.diffuse_only && h.front)
            add_specular_grad(s, tape.caches[h.surfel], wo, shading, g_color, a);
          a.normal += w * h.orient * g.tail<3>();

          const double kernel = h.alpha / s.opacity;
          a.grad.opacity += g_alpha * kernel;
          const double g_kernel = g_alpha * s.opacity;
          const double g_u = -g_kernel * kernel * h.u;
          const double g_v = -g_kernel * kernel * h.v;
          const double g_t = w * g[3] * depth_scale;
          plane_hit_backward(s, ray, g_u, g_v, g_t, a.grad);
        }
      }
  });

  // Reduce in chunk order so the sum is independent of the thread count.
  for (int i = 0; i < n_surfels; ++i) {
    SurfelAdjoint total;
    total.radiance.assign(samples, Rgb::Zero());
    for (int c = 0; c < chunks; ++c) {
      const SurfelAdjoint& a = chunk_adj[c][i];
      total.grad += a.grad;
      total.normal += a.normal;
      for (int k = 0; k < samples; ++k) total.radiance[k] += a.radiance[k];
    }
    const LightCache& cache = tape.caches[i];
    if (samples > 0)
      light_cache_backward(surfels[i], cache, scene.environment, cache.visibility,
                           total, grad.environment);
    normal_to_tangents(surfels[i], total.normal, total.grad);
    grad.surfels[i] += total.grad;
  }
}

ShadeGrad shade_backward(const Surfel& s, const Vec3& wo, const EnvironmentMap& env,
                         std::span<const double> visibility_row, const ShadingOptions& opts,
                         const Rgb& upstream) {
  ShadeGrad out;
  const LightCache cache = build_light_cache(s, env, visibility_row, opts.samples);
  SurfelAdjoint adj;
  adj.radiance.assign(opts.samples, Rgb::Zero());
  add_diffuse_grad(s, wo, upstream, adj.grad);
  if (!opts.diffuse_only && wo.dot(cache.normal) > 0.0) {
    add_specular_grad(s, cache, wo, opts, upstream, adj);
    light_cache_backward(s, cache, env, visibility_row, adj, out.environment);
  }
  out.normal = adj.normal;
  normal_to_tangents(s, adj.normal, adj.grad);
  out.surfel = adj.grad;
  return out;
}

}  // namespace glosskit
