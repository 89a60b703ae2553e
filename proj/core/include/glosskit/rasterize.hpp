// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "glosskit/brdf.hpp"
#include "glosskit/camera.hpp"
#include "glosskit/raytrace.hpp"
#include "glosskit/scene.hpp"

namespace glosskit {

/// Hits below this alpha are skipped during compositing.
inline constexpr double kAlphaCutoff = 1.0 / 255.0;
/// Compositing stops once transmittance falls below this.
inline constexpr double kTransmittanceStop = 1e-4;
/// Surfels are gathered only within 3 standard deviations: u^2 + v^2 <= 9.
inline constexpr double kFootprintRadius2 = 9.0;

struct RenderBuffers {
  int width = 0;
  int height = 0;
  std::vector<Rgb> color;
  std::vector<double> depth;    // alpha-blended camera z
  std::vector<Vec3> normal;     // alpha-blended, camera-facing, world frame
  std::vector<double> opacity;  // 1 - final transmittance

  RenderBuffers() = default;
  RenderBuffers(int w, int h)
      : width(w),
        height(h),
        color(static_cast<std::size_t>(w) * h, Rgb::Zero()),
        depth(static_cast<std::size_t>(w) * h, 0.0),
        normal(static_cast<std::size_t>(w) * h, Vec3::Zero()),
        opacity(static_cast<std::size_t>(w) * h, 0.0) {}

  int index(int x, int y) const { return y * width + x; }
  std::size_t size() const { return color.size(); }
};

/// opacity * kernel(u, v).
double splat_alpha(const Surfel& s, double u, double v);

struct CompositeHit {
  double t = 0.0;
  double alpha = 0.0;
  Rgb color = Rgb::Zero();
  Vec3 normal = Vec3::Zero();
  int index = 0;  // stable tie-break for equal t
};

struct CompositeResult {
  Rgb color = Rgb::Zero();
  double depth = 0.0;  // blended t
  Vec3 normal = Vec3::Zero();
  double opacity = 0.0;
};

/// Front-to-back alpha blending of hits sorted by (t, index). Unsorted input
/// throws.
CompositeResult composite_pixel(std::span<const CompositeHit> hits);

struct RenderOptions {
  ShadingOptions shading;
  bool use_visibility = true;
  int threads = 1;
};

/// One composited hit as recorded for the backward pass.
struct TapeHit {
  int surfel = -1;
  double u = 0.0, v = 0.0, t = 0.0;
  double alpha = 0.0;
  Rgb color = Rgb::Zero();
  double orient = 1.0;  // +1 or -1: sign that turns the normal toward the camera
  bool front = true;    // shaded with the specular term
};

/// Everything the forward pass decided, kept so gradients can be formed
/// without re-rendering.
struct RenderTape {
  Camera camera;
  RenderOptions options;
  std::vector<LightCache> caches;     // per surfel
  std::vector<std::size_t> offsets;   // pixel -> first hit, size pixels + 1
  std::vector<TapeHit> hits;
  std::vector<double> final_transmittance;
  std::uint64_t branch_hash = 0;
};

/// Surfels pierced by a ray inside their 3-sigma footprint with alpha at or
/// above the cutoff, sorted by (t, surfel index).
struct GatheredHit {
  int surfel;
  double u, v, t, alpha;
};
void gather_hits(const Ray& ray, const SurfelBvh& bvh, std::span<const Surfel> surfels,
                 std::vector<GatheredHit>& out);

/// Renders every pixel. An empty visibility table (or use_visibility=false)
/// means unoccluded lighting. When `tape` is given, it is filled for
/// render_backward; when `branch` is given, discrete decisions are hashed
/// into it (serial evaluation).
RenderBuffers render(const Scene& scene, const Camera& camera, const VisibilityTable& visibility,
                     const RenderOptions& options, RenderTape* tape = nullptr,
                     BranchTrace* branch = nullptr);

/// Normals from finite differences of the back-projected expected depth
/// (blended depth / opacity). Pixels whose opacity, or whose stencil
/// neighbours' opacity, is below 0.5 fall back to one-sided differences or
/// are marked invalid. Output normals face the camera, world frame.
struct DepthNormals {
  int width = 0;
  int height = 0;
  std::vector<Vec3> normal;
  std::vector<std::uint8_t> valid;
};

inline constexpr double kDepthNormalMinOpacity = 0.5;

DepthNormals depth_to_normal(const RenderBuffers& buffers, const Camera& camera,
                             BranchTrace* branch = nullptr);

/// Adjoint of depth_to_normal: given dL/dN (world) per valid pixel,
/// accumulates dL/d depth and dL/d opacity.
void depth_to_normal_backward(const RenderBuffers& buffers, const Camera& camera,
                              const DepthNormals& normals, std::span<const Vec3> grad_normal,
                              std::span<double> grad_depth, std::span<double> grad_opacity);

}  // namespace glosskit
