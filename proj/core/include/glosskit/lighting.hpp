// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>

#include "glosskit/common.hpp"
#include "glosskit/surfel.hpp"

namespace glosskit {

/// 16x32 lat-long grid of distant RGB radiance. Row 0 is centred just below
/// the +z pole; columns advance with azimuth atan2(y, x) from 0 to 2*pi.
class EnvironmentMap {
 public:
  static constexpr int kRows = 16;
  static constexpr int kCols = 32;
  static constexpr int kTexels = kRows * kCols;

  EnvironmentMap() { texels_.fill(Rgb::Zero()); }
  explicit EnvironmentMap(const Rgb& constant) { texels_.fill(constant); }

  Rgb& at(int row, int col) { return texels_[row * kCols + col]; }
  const Rgb& at(int row, int col) const { return texels_[row * kCols + col]; }
  std::span<Rgb> texels() { return texels_; }
  std::span<const Rgb> texels() const { return texels_; }

  /// Unit direction through the centre of texel (row, col).
  static Vec3 texel_direction(int row, int col);

  /// Throws Error if any radiance entry is negative or non-finite.
  void validate() const;

 private:
  std::array<Rgb, kTexels> texels_;
};

/// Bilinear footprint of a direction: up to four texels with weights, or a
/// whole pole row when the direction is exactly a pole.
template <class T>
struct EnvTaps {
  std::array<int, 4> index{};
  std::array<T, 4> weight{};
  int pole_row = -1;  // >= 0: average of that row, weights unused
};

template <class T>
EnvTaps<T> env_taps(const Vec3T<T>& dir, BranchTrace* branch = nullptr) {
  using std::acos;
  using std::atan2;
  using std::floor;
  constexpr int rows = EnvironmentMap::kRows;
  constexpr int cols = EnvironmentMap::kCols;
  EnvTaps<T> taps;
  if (value_of(dir.x()) == 0.0 && value_of(dir.y()) == 0.0) {
    taps.pole_row = value_of(dir.z()) > 0.0 ? 0 : rows - 1;
    trace(branch, 0x7000 + taps.pole_row);
    return taps;
  }
  T phi = atan2(dir.y(), dir.x());
  if (value_of(phi) < 0.0) phi += 2.0 * kPi;
  T u = phi * (cols / (2.0 * kPi)) - 0.5;
  const double c0f = std::floor(value_of(u));
  T fu = u - c0f;
  const int c0 = ((static_cast<int>(c0f) % cols) + cols) % cols;
  const int c1 = (c0 + 1) % cols;

  const double z = std::clamp(value_of(dir.z()), -1.0, 1.0);
  const double v_val = std::acos(z) * (rows / kPi) - 0.5;
  T v;
  int r0;
  if (v_val <= 0.0) {
    v = T(0.0);
    r0 = 0;
  } else if (v_val >= rows - 1) {
    v = T(rows - 1.0);
    r0 = rows - 2;
  } else {
    // Clamp keeps acos inside its domain; the derivative is untouched away
    // from the poles, which the branches above already exclude.
    T zc = dir.z();
    v = acos(zc) * (rows / kPi) - 0.5;
    r0 = std::min(static_cast<int>(std::floor(v_val)), rows - 2);
  }
  T fv = v - static_cast<double>(r0);
  const int r1 = r0 + 1;
  trace(branch, (static_cast<std::uint64_t>(r0) << 8) ^ static_cast<std::uint64_t>(c0) ^
                    (v_val <= 0.0 ? 0x10000 : 0) ^ (v_val >= rows - 1 ? 0x20000 : 0));
  taps.index = {r0 * cols + c0, r0 * cols + c1, r1 * cols + c0, r1 * cols + c1};
  taps.weight = {(1.0 - fu) * (1.0 - fv), fu * (1.0 - fv), (1.0 - fu) * fv, fu * fv};
  return taps;
}

template <class T>
Vec3T<T> gather(const EnvironmentMap& env, const EnvTaps<T>& taps) {
  const auto texels = env.texels();
  Vec3T<T> out(T(0.0), T(0.0), T(0.0));
  if (taps.pole_row >= 0) {
    Rgb sum = Rgb::Zero();
    for (int c = 0; c < EnvironmentMap::kCols; ++c) sum += env.at(taps.pole_row, c);
    sum /= EnvironmentMap::kCols;
    return Vec3T<T>(T(sum[0]), T(sum[1]), T(sum[2]));
  }
  for (int k = 0; k < 4; ++k) {
    const Rgb& t = texels[taps.index[k]];
    out.x() += taps.weight[k] * t[0];
    out.y() += taps.weight[k] * t[1];
    out.z() += taps.weight[k] * t[2];
  }
  return out;
}

/// Scatters an RGB adjoint back onto the texels a tap set touched.
void scatter(const EnvTaps<double>& taps, const Rgb& adjoint, std::span<Rgb> grad);

/// Bilinear lookup with azimuthal wrap; exact poles return the pole-row mean.
Rgb env_sample(const EnvironmentMap& env, const Vec3& dir);

/// vis * env(w_i) + max(indirect SH(w_i), 0).
Rgb incident_radiance(const Surfel& s, const Vec3& wi, const EnvironmentMap& env, double vis);

/// Mean over texels of sum_c |L_c - mean_c L|.
double light_reg(const EnvironmentMap& env);

/// Accumulates scale * d light_reg / d radiance into grad (one Rgb per texel).
void light_reg_grad(const EnvironmentMap& env, double scale, std::span<Rgb> grad,
                    BranchTrace* branch = nullptr);

}  // namespace glosskit
