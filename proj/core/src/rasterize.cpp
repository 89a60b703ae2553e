// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "glosskit/rasterize.hpp"

#include <algorithm>
#include <cmath>

#include "glosskit/parallel.hpp"

namespace glosskit {

double splat_alpha(const Surfel& s, double u, double v) { return s.opacity * eval_kernel(u, v); }

CompositeResult composite_pixel(std::span<const CompositeHit> hits) {
  for (std::size_t i = 1; i < hits.size(); ++i) {
    const bool ordered = hits[i - 1].t < hits[i].t ||
                         (hits[i - 1].t == hits[i].t && hits[i - 1].index <= hits[i].index);
    if (!ordered) throw Error("composite_pixel: hits are not sorted by depth");
  }
  CompositeResult out;
  double transmittance = 1.0;
  for (const CompositeHit& h : hits) {
    if (h.alpha < kAlphaCutoff) continue;
    const double w = transmittance * h.alpha;
    out.color += w * h.color;
    out.depth += w * h.t;
    out.normal += w * h.normal;
    transmittance *= 1.0 - h.alpha;
    if (transmittance < kTransmittanceStop) break;
  }
  out.opacity = 1.0 - transmittance;
  return out;
}

void gather_hits(const Ray& ray, const SurfelBvh& bvh, std::span<const Surfel> surfels,
                 std::vector<GatheredHit>& out) {
  out.clear();
  bvh.traverse(ray, kInfinity, LeafTest::Hull, [&](int i) {
    const Surfel& s = surfels[i];
    double u, v, t;
    if (!ray_plane_uv<double>(ray.origin, ray.direction, s.position, s.tangent_u, s.tangent_v,
                              s.scale_u, s.scale_v, u, v, t))
      return;
    if (u * u + v * v > kFootprintRadius2) return;
    const double alpha = s.opacity * eval_kernel(u, v);
    if (alpha < kAlphaCutoff) return;
    out.push_back({i, u, v, t, alpha});
  });
  std::sort(out.begin(), out.end(), [](const GatheredHit& a, const GatheredHit& b) {
    if (a.t != b.t) return a.t < b.t;
    return a.surfel < b.surfel;
  });
}

namespace {

constexpr int kRowsPerChunk = 4;

struct ChunkOutput {
  std::vector<TapeHit> hits;
  std::vector<std::size_t> counts;  // hits per pixel
  std::vector<double> final_t;
};

}  // namespace

RenderBuffers render(const Scene& scene, const Camera& camera, const VisibilityTable& visibility,
                     const RenderOptions& options, RenderTape* tape, BranchTrace* branch) {
  camera.validate();
  const int width = camera.width;
  const int height = camera.height;
  RenderBuffers out(width, height);
  const std::span<const Surfel> surfels(scene.surfels);
  const int n_surfels = static_cast<int>(surfels.size());
  const ShadingOptions& shading = options.shading;

  const bool use_vis = options.use_visibility && !visibility.empty();
  if (use_vis && (visibility.surfel_count() != n_surfels || visibility.samples != shading.samples))
    throw Error("render: visibility table does not match the scene and sample count");

  std::vector<LightCache> caches(n_surfels);
  for (int i = 0; i < n_surfels; ++i) {
    if (shading.diffuse_only) {
      caches[i].normal = normal_of(surfels[i]);
      continue;
    }
    caches[i] = build_light_cache(surfels[i], scene.environment,
                                  use_vis ? visibility.row(i) : std::span<const double>{},
                                  shading.samples, branch);
  }

  const SurfelBvh bvh = SurfelBvh::build(surfels, kAlphaCutoff);
  const Vec3 forward = camera.forward();
  const int chunks = (height + kRowsPerChunk - 1) / kRowsPerChunk;
  std::vector<ChunkOutput> chunk_out(chunks);
  const int threads = branch ? 1 : options.threads;

  parallel_chunks(chunks, threads, [&](int chunk) {
    ChunkOutput& co = chunk_out[chunk];
    std::vector<GatheredHit> gathered;
    const int y0 = chunk * kRowsPerChunk;
    const int y1 = std::min(height, y0 + kRowsPerChunk);
    for (int y = y0; y < y1; ++y)
      for (int x = 0; x < width; ++x) {
        const int pix = out.index(x, y);
        const Ray ray = pixel_ray(camera, Vec2(x + 0.5, y + 0.5));
        gather_hits(ray, bvh, surfels, gathered);
        const Vec3 wo = -ray.direction;
        double transmittance = 1.0;
        Rgb color = Rgb::Zero();
        Vec3 normal = Vec3::Zero();
        double depth_t = 0.0;
        std::size_t used = 0;
        for (const GatheredHit& g : gathered) {
          const Surfel& s = surfels[g.surfel];
          const LightCache& cache = caches[g.surfel];
          const Rgb c = shade_cached(s, cache, wo, shading, branch);
          const double orient = cache.normal.dot(wo) >= 0.0 ? 1.0 : -1.0;
          const double w = transmittance * g.alpha;
          color += w * c;
          normal += w * orient * cache.normal;
          depth_t += w * g.t;
          trace(branch, static_cast<std::uint64_t>(g.surfel) * 2 + (orient > 0.0 ? 1 : 0));
          if (tape) {
            co.hits.push_back(
                TapeHit{g.surfel, g.u, g.v, g.t, g.alpha, c, orient, cache.normal.dot(wo) > 0.0});
          }
          ++used;
          transmittance *= 1.0 - g.alpha;
          if (transmittance < kTransmittanceStop) break;
        }
        trace(branch, 0xABCD0000ULL + used);
        out.color[pix] = color;
        out.normal[pix] = normal;
        out.depth[pix] = depth_t * ray.direction.dot(forward);
        out.opacity[pix] = 1.0 - transmittance;
        if (tape) {
          co.counts.push_back(used);
          co.final_t.push_back(transmittance);
        }
      }
  });

  if (tape) {
    tape->camera = camera;
    tape->options = options;
    tape->caches = std::move(caches);
    tape->offsets.assign(1, 0);
    tape->hits.clear();
    tape->final_transmittance.clear();
    for (ChunkOutput& co : chunk_out) {
      for (std::size_t k = 0; k < co.counts.size(); ++k)
        tape->offsets.push_back(tape->offsets.back() + co.counts[k]);
      tape->hits.insert(tape->hits.end(), co.hits.begin(), co.hits.end());
      tape->final_transmittance.insert(tape->final_transmittance.end(), co.final_t.begin(),
                                       co.final_t.end());
    }
    tape->branch_hash = branch ? branch->value() : 0;
  }
  return out;
}

namespace {

Vec3 pixel_dir_cam(const Camera& cam, int x, int y) {
  return {(x + 0.5 - cam.cx) / cam.fx, (y + 0.5 - cam.cy) / cam.fy, 1.0};
}

// Stencil choice along one axis: the pair of pixels whose back-projected
// points form the difference, or {-1, -1} when none is usable.
struct Stencil {
  int plus = -1;
  int minus = -1;
};

Stencil axis_stencil(const RenderBuffers& b, int x, int y, int dx, int dy) {
  auto ok = [&](int px, int py) {
    return px >= 0 && py >= 0 && px < b.width && py < b.height &&
           b.opacity[b.index(px, py)] >= kDepthNormalMinOpacity;
  };
  const int c = b.index(x, y);
  const bool has_plus = ok(x + dx, y + dy);
  const bool has_minus = ok(x - dx, y - dy);
  if (has_plus && has_minus) return {b.index(x + dx, y + dy), b.index(x - dx, y - dy)};
  if (has_plus) return {b.index(x + dx, y + dy), c};
  if (has_minus) return {c, b.index(x - dx, y - dy)};
  return {};
}

Vec3 backproject(const RenderBuffers& b, const Camera& cam, int pix) {
  const int x = pix % b.width;
  const int y = pix / b.width;
  return pixel_dir_cam(cam, x, y) * (b.depth[pix] / b.opacity[pix]);
}

}  // namespace

DepthNormals depth_to_normal(const RenderBuffers& b, const Camera& camera, BranchTrace* branch) {
  DepthNormals out;
  out.width = b.width;
  out.height = b.height;
  out.normal.assign(b.size(), Vec3::Zero());
  out.valid.assign(b.size(), 0);
  const Mat3 cam_to_world = camera.rotation.transpose();
  for (int y = 0; y < b.height; ++y)
    for (int x = 0; x < b.width; ++x) {
      const int pix = b.index(x, y);
      if (b.opacity[pix] < kDepthNormalMinOpacity) {
        trace(branch, 0x51);
        continue;
      }
      const Stencil sx = axis_stencil(b, x, y, 1, 0);
      const Stencil sy = axis_stencil(b, x, y, 0, 1);
      trace(branch, (static_cast<std::uint64_t>(sx.plus - sx.minus + 8) << 16) ^
                        static_cast<std::uint64_t>(sy.plus - sy.minus + 8 * b.width));
      if (sx.plus < 0 || sy.plus < 0) continue;
      const Vec3 gx = backproject(b, camera, sx.plus) - backproject(b, camera, sx.minus);
      const Vec3 gy = backproject(b, camera, sy.plus) - backproject(b, camera, sy.minus);
      Vec3 n = gx.cross(gy);
      const double len = n.norm();
      if (!(len > 1e-20)) continue;
      n /= len;
      const Vec3 p = backproject(b, camera, pix);
      const bool flip = n.dot(p) > 0.0;
      trace(branch, flip ? 0x53 : 0x54);
      if (flip) n = -n;
      out.normal[pix] = cam_to_world * n;
      out.valid[pix] = 1;
    }
  return out;
}

void depth_to_normal_backward(const RenderBuffers& b, const Camera& camera,
                              const DepthNormals& normals, std::span<const Vec3> grad_normal,
                              std::span<double> grad_depth, std::span<double> grad_opacity) {
  std::vector<Vec3> grad_point(b.size(), Vec3::Zero());
  for (int y = 0; y < b.height; ++y)
    for (int x = 0; x < b.width; ++x) {
      const int pix = b.index(x, y);
      if (!normals.valid[pix]) continue;
      const Stencil sx = axis_stencil(b, x, y, 1, 0);
      const Stencil sy = axis_stencil(b, x, y, 0, 1);
      const Vec3 gx = backproject(b, camera, sx.plus) - backproject(b, camera, sx.minus);
      const Vec3 gy = backproject(b, camera, sy.plus) - backproject(b, camera, sy.minus);
      const Vec3 c = gx.cross(gy);
      const double len = c.norm();
      const Vec3 chat = c / len;
      // N_cam = sign * c / |c|; sign recovered from the stored world normal.
      const Vec3 n_cam = camera.rotation * normals.normal[pix];
      const double sign = n_cam.dot(chat) >= 0.0 ? 1.0 : -1.0;
      const Vec3 g_n = camera.rotation * grad_normal[pix];
      const Vec3 g_c = sign * (g_n - chat * chat.dot(g_n)) / len;
      const Vec3 g_gx = gy.cross(g_c);
      const Vec3 g_gy = g_c.cross(gx);
      grad_point[sx.plus] += g_gx;
      grad_point[sx.minus] -= g_gx;
      grad_point[sy.plus] += g_gy;
      grad_point[sy.minus] -= g_gy;
    }
  for (int pix = 0; pix < static_cast<int>(b.size()); ++pix) {
    if (grad_point[pix].isZero(0.0)) continue;
    const int x = pix % b.width;
    const int y = pix / b.width;
    const double g_z = grad_point[pix].dot(pixel_dir_cam(camera, x, y));
    const double o = b.opacity[pix];
    grad_depth[pix] += g_z / o;
    grad_opacity[pix] -= g_z * b.depth[pix] / (o * o);
  }
}

}  // namespace glosskit
