// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "glosskit/lighting.hpp"

#include "glosskit/sh.hpp"

namespace glosskit {

Vec3 EnvironmentMap::texel_direction(int row, int col) {
  const double theta = (row + 0.5) * kPi / kRows;
  const double phi = (col + 0.5) * 2.0 * kPi / kCols;
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

void EnvironmentMap::validate() const {
  for (const Rgb& t : texels_)
    if (!t.isFinite().all() || (t < 0.0).any())
      throw Error("environment map: radiance must be finite and nonnegative");
}

void scatter(const EnvTaps<double>& taps, const Rgb& adjoint, std::span<Rgb> grad) {
  if (taps.pole_row >= 0) {
    const Rgb share = adjoint / EnvironmentMap::kCols;
    for (int c = 0; c < EnvironmentMap::kCols; ++c)
      grad[taps.pole_row * EnvironmentMap::kCols + c] += share;
    return;
  }
  for (int k = 0; k < 4; ++k) grad[taps.index[k]] += taps.weight[k] * adjoint;
}

Rgb env_sample(const EnvironmentMap& env, const Vec3& dir) {
  return gather(env, env_taps<double>(dir)).array();
}

Rgb incident_radiance(const Surfel& s, const Vec3& wi, const EnvironmentMap& env, double vis) {
  const Rgb indirect = eval_sh(std::span<const Rgb>(s.indirect_sh), wi).max(0.0);
  return vis * env_sample(env, wi) + indirect;
}

namespace {

// L_c minus the channel mean, written so equal channels give exactly zero.
Rgb neutral_residual(const Rgb& t) {
  return Rgb((t[0] - t[1]) + (t[0] - t[2]), (t[1] - t[0]) + (t[1] - t[2]),
             (t[2] - t[0]) + (t[2] - t[1])) /
         3.0;
}

}  // namespace

double light_reg(const EnvironmentMap& env) {
  double total = 0.0;
  for (const Rgb& t : env.texels()) total += neutral_residual(t).abs().sum();
  return total / EnvironmentMap::kTexels;
}

void light_reg_grad(const EnvironmentMap& env, double scale, std::span<Rgb> grad,
                    BranchTrace* branch) {
  const auto texels = env.texels();
  const double w = scale / EnvironmentMap::kTexels;
  for (int i = 0; i < EnvironmentMap::kTexels; ++i) {
    const Rgb d = neutral_residual(texels[i]);
    Rgb sgn;
    for (int c = 0; c < 3; ++c) {
      sgn[c] = d[c] > 0.0 ? 1.0 : (d[c] < 0.0 ? -1.0 : 0.0);
      trace(branch, static_cast<std::uint64_t>(sgn[c] + 2.0));
    }
    grad[i] += w * (sgn - sgn.sum() / 3.0);
  }
}

}  // namespace glosskit
