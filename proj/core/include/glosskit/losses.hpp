// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "glosskit/camera.hpp"
#include "glosskit/rasterize.hpp"

namespace glosskit {

struct LossWeights {
  double dssim = 0.2;
  double normal = 0.05;
  double light = 0.01;
  double alpha = 0.1;
};

struct LossReport {
  int iteration = 0;
  double total = 0.0;
  double photometric = 0.0;
  double normal = 0.0;
  double light = 0.0;
  double alpha = 0.0;
};

/// Gradient functions below accumulate scale * d(loss)/d(input) into `grad`
/// when it is non-empty.

/// Mean absolute difference over pixels and channels.
double l1_loss(std::span<const Rgb> a, std::span<const Rgb> b, std::span<Rgb> grad = {},
               double scale = 1.0, BranchTrace* branch = nullptr);

/// Mean SSIM over pixels and channels: 11x11 Gaussian window (sigma 1.5),
/// C1 = 0.01^2, C2 = 0.03^2, zero padding at the border.
double ssim(std::span<const Rgb> a, std::span<const Rgb> b, int width, int height,
            std::span<Rgb> grad_a = {}, double scale = 1.0);

/// (1 - w) * L1 + w * (1 - SSIM), w = dssim_weight.
double photometric_loss(std::span<const Rgb> rendered, std::span<const Rgb> target, int width,
                        int height, double dssim_weight = 0.2, std::span<Rgb> grad = {},
                        double scale = 1.0, BranchTrace* branch = nullptr);

/// Mean over valid depth-normal pixels of O - n_blend . N, which equals the
/// blend-weighted sum of (1 - n_i . N) over the splats of the pixel.
double normal_loss(const RenderBuffers& buffers, const DepthNormals& depth_normals,
                   std::span<Vec3> grad_normal = {}, std::span<Vec3> grad_depth_normal = {},
                   std::span<double> grad_opacity = {}, double scale = 1.0);

double normal_loss(const RenderBuffers& buffers, const Camera& camera);

/// Mean |M - O|.
double alpha_loss(std::span<const double> opacity, std::span<const double> mask,
                  std::span<double> grad = {}, double scale = 1.0,
                  BranchTrace* branch = nullptr);

/// 10 log10(1 / MSE) over pixels and channels; infinite for identical images.
double psnr(std::span<const Rgb> a, std::span<const Rgb> b);

/// Fills `total` from the parts: photometric + l_n normal + l_light light +
/// l_alpha alpha.
LossReport total_loss(const LossReport& parts, const LossWeights& weights);

}  // namespace glosskit
