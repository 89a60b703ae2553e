// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "glosskit/losses.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace glosskit {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

void check_sizes(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw Error(std::string(what) + ": dimension mismatch");
}

std::array<double, kWindow> gaussian_window() {
  std::array<double, kWindow> w;
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    w[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    sum += w[i];
  }
  for (double& x : w) x /= sum;
  return w;
}

// Separable "same" convolution with zero padding; the window is symmetric,
// so the operator is its own adjoint.
std::vector<double> blur(const std::vector<double>& in, int width, int height) {
  static const std::array<double, kWindow> w = gaussian_window();
  constexpr int half = kWindow / 2;
  std::vector<double> tmp(in.size(), 0.0), out(in.size(), 0.0);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int k = -half; k <= half; ++k) {
        const int xx = x + k;
        if (xx >= 0 && xx < width) acc += w[k + half] * in[y * width + xx];
      }
      tmp[y * width + x] = acc;
    }
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int k = -half; k <= half; ++k) {
        const int yy = y + k;
        if (yy >= 0 && yy < height) acc += w[k + half] * tmp[yy * width + x];
      }
      out[y * width + x] = acc;
    }
  return out;
}

}  // namespace

double l1_loss(std::span<const Rgb> a, std::span<const Rgb> b, std::span<Rgb> grad, double scale,
               BranchTrace* branch) {
  check_sizes(a.size(), b.size(), "l1_loss");
  if (a.empty()) return 0.0;
  const double norm = 1.0 / (3.0 * static_cast<double>(a.size()));
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Rgb d = a[i] - b[i];
    sum += d.abs().sum();
    for (int c = 0; c < 3; ++c) trace(branch, d[c] > 0.0 ? 1 : (d[c] < 0.0 ? 2 : 3));
    if (!grad.empty()) {
      for (int c = 0; c < 3; ++c) {
        const double s = d[c] > 0.0 ? 1.0 : (d[c] < 0.0 ? -1.0 : 0.0);
        grad[i][c] += scale * norm * s;
      }
    }
  }
  return sum * norm;
}

double ssim(std::span<const Rgb> a, std::span<const Rgb> b, int width, int height,
            std::span<Rgb> grad_a, double scale) {
  check_sizes(a.size(), b.size(), "ssim");
  check_sizes(a.size(), static_cast<std::size_t>(width) * height, "ssim");
  if (a.empty()) return 1.0;
  const std::size_t n = a.size();
  const double norm = 1.0 / (3.0 * static_cast<double>(n));
  double total = 0.0;
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = a[i][c];
      y[i] = b[i][c];
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const std::vector<double> mx = blur(x, width, height);
    const std::vector<double> my = blur(y, width, height);
    const std::vector<double> exx = blur(xx, width, height);
    const std::vector<double> eyy = blur(yy, width, height);
    const std::vector<double> exy = blur(xy, width, height);
    std::vector<double> g_m, g_xx, g_xy;
    if (!grad_a.empty()) {
      g_m.assign(n, 0.0);
      g_xx.assign(n, 0.0);
      g_xy.assign(n, 0.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double a1 = 2.0 * mx[i] * my[i] + kC1;
      const double a2 = 2.0 * (exy[i] - mx[i] * my[i]) + kC2;
      const double b1 = mx[i] * mx[i] + my[i] * my[i] + kC1;
      const double b2 = (exx[i] - mx[i] * mx[i]) + (eyy[i] - my[i] * my[i]) + kC2;
      const double s = a1 * a2 / (b1 * b2);
      total += s;
      if (grad_a.empty()) continue;
      const double inv = 1.0 / (b1 * b2);
      g_m[i] = 2.0 * my[i] * a2 * inv - 2.0 * my[i] * a1 * inv - 2.0 * mx[i] * s / b1 +
               2.0 * mx[i] * s / b2;
      g_xy[i] = 2.0 * a1 * inv;
      g_xx[i] = -s / b2;
    }
    if (grad_a.empty()) continue;
    const std::vector<double> bm = blur(g_m, width, height);
    const std::vector<double> bxx = blur(g_xx, width, height);
    const std::vector<double> bxy = blur(g_xy, width, height);
    for (std::size_t i = 0; i < n; ++i)
      grad_a[i][c] += scale * norm * (bm[i] + 2.0 * x[i] * bxx[i] + y[i] * bxy[i]);
  }
  return total * norm;
}

double photometric_loss(std::span<const Rgb> rendered, std::span<const Rgb> target, int width,
                        int height, double dssim_weight, std::span<Rgb> grad, double scale,
                        BranchTrace* branch) {
  check_sizes(rendered.size(), target.size(), "photometric_loss");
  check_sizes(rendered.size(), static_cast<std::size_t>(width) * height, "photometric_loss");
  const double l1 = l1_loss(rendered, target, grad, scale * (1.0 - dssim_weight), branch);
  double s = 1.0;
  if (dssim_weight != 0.0) s = ssim(rendered, target, width, height, grad, -scale * dssim_weight);
  // Identical images give exactly zero regardless of rounding in the window sums.
  const double dssim = l1 == 0.0 ? 0.0 : 1.0 - s;
  return (1.0 - dssim_weight) * l1 + dssim_weight * dssim;
}

double normal_loss(const RenderBuffers& buffers, const DepthNormals& dn,
                   std::span<Vec3> grad_normal, std::span<Vec3> grad_depth_normal,
                   std::span<double> grad_opacity, double scale) {
  int valid = 0;
  for (std::uint8_t v : dn.valid) valid += v;
  if (valid == 0) return 0.0;
  const double norm = 1.0 / valid;
  double sum = 0.0;
  for (std::size_t i = 0; i < buffers.size(); ++i) {
    if (!dn.valid[i]) continue;
    sum += buffers.opacity[i] - buffers.normal[i].dot(dn.normal[i]);
    if (!grad_normal.empty()) grad_normal[i] -= scale * norm * dn.normal[i];
    if (!grad_depth_normal.empty()) grad_depth_normal[i] -= scale * norm * buffers.normal[i];
    if (!grad_opacity.empty()) grad_opacity[i] += scale * norm;
  }
  return std::max(0.0, sum * norm);
}

double normal_loss(const RenderBuffers& buffers, const Camera& camera) {
  return normal_loss(buffers, depth_to_normal(buffers, camera));
}

double alpha_loss(std::span<const double> opacity, std::span<const double> mask,
                  std::span<double> grad, double scale, BranchTrace* branch) {
  check_sizes(opacity.size(), mask.size(), "alpha_loss");
  if (opacity.empty()) return 0.0;
  const double norm = 1.0 / static_cast<double>(opacity.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < opacity.size(); ++i) {
    const double d = opacity[i] - mask[i];
    sum += std::abs(d);
    trace(branch, d > 0.0 ? 5 : (d < 0.0 ? 6 : 7));
    if (!grad.empty()) grad[i] += scale * norm * (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0));
  }
  return sum * norm;
}

double psnr(std::span<const Rgb> a, std::span<const Rgb> b) {
  check_sizes(a.size(), b.size(), "psnr");
  if (a.empty()) throw Error("psnr: empty images");
  double se = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) se += (a[i] - b[i]).square().sum();
  const double mse = se / (3.0 * static_cast<double>(a.size()));
  return mse == 0.0 ? std::numeric_limits<double>::infinity() : 10.0 * std::log10(1.0 / mse);
}

LossReport total_loss(const LossReport& parts, const LossWeights& w) {
  LossReport r = parts;
  r.total = parts.photometric + w.normal * parts.normal + w.light * parts.light +
            w.alpha * parts.alpha;
  return r;
}

}  // namespace glosskit
