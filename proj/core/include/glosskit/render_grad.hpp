// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <span>
#include <vector>

#include "glosskit/rasterize.hpp"

namespace glosskit {

/// dL/d(field) for every Surfel field, in physical units.
struct SurfelGrad {
  Vec3 position = Vec3::Zero();
  Vec3 tangent_u = Vec3::Zero();
  Vec3 tangent_v = Vec3::Zero();
  double scale_u = 0.0;
  double scale_v = 0.0;
  double opacity = 0.0;
  double roughness = 0.0;
  Rgb specular_reflectance = Rgb::Zero();
  std::array<Rgb, kDiffuseShCoeffs> diffuse_sh = Surfel::zero_coeffs<kDiffuseShCoeffs>();
  std::array<Rgb, kIndirectShCoeffs> indirect_sh = Surfel::zero_coeffs<kIndirectShCoeffs>();

  SurfelGrad& operator+=(const SurfelGrad& o);
};

struct SceneGrad {
  std::vector<SurfelGrad> surfels;
  std::vector<Rgb> environment = std::vector<Rgb>(EnvironmentMap::kTexels, Rgb::Zero());

  explicit SceneGrad(std::size_t n = 0) : surfels(n) {}
};

/// Upstream gradients with respect to each render buffer.
struct BufferGrad {
  std::vector<Rgb> color;
  std::vector<double> depth;
  std::vector<Vec3> normal;
  std::vector<double> opacity;

  explicit BufferGrad(std::size_t pixels = 0)
      : color(pixels, Rgb::Zero()),
        depth(pixels, 0.0),
        normal(pixels, Vec3::Zero()),
        opacity(pixels, 0.0) {}
};

/// Accumulates dL/d(scene) into `grad` given dL/d(buffers) and the tape of
/// the forward pass that produced the buffers.
void render_backward(const Scene& scene, const RenderTape& tape, const BufferGrad& upstream,
                     SceneGrad& grad);

/// Gradient of g . shade(...) for a single surfel; used to check the
/// shading adjoint in isolation. The normal gradient is reported both with
/// respect to the unit normal and chained onto the tangents.
struct ShadeGrad {
  SurfelGrad surfel;
  Vec3 normal = Vec3::Zero();
  std::vector<Rgb> environment = std::vector<Rgb>(EnvironmentMap::kTexels, Rgb::Zero());
};

ShadeGrad shade_backward(const Surfel& s, const Vec3& wo, const EnvironmentMap& env,
                         std::span<const double> visibility_row, const ShadingOptions& opts,
                         const Rgb& upstream);

/// Chains dL/dn of n = normalize(t_u x t_v) onto the tangents.
void normal_to_tangents(const Surfel& s, const Vec3& grad_normal, SurfelGrad& out);

}  // namespace glosskit
