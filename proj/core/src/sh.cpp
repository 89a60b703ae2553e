// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "glosskit/sh.hpp"

#include <string>

namespace glosskit {

int sh_degree_for(std::size_t count) {
  for (int d = 0; d <= 3; ++d)
    if (static_cast<std::size_t>(sh_count(d)) == count) return d;
  throw Error("sh: coefficient count " + std::to_string(count) +
              " does not match any supported degree (1, 4, 9 or 16 expected)");
}

double eval_sh(std::span<const double> coeffs, const Vec3& dir) {
  double basis[16];
  sh_basis<double>(sh_degree_for(coeffs.size()), dir, basis);
  double out = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) out += coeffs[i] * basis[i];
  return out;
}

Rgb eval_sh(std::span<const Rgb> coeffs, const Vec3& dir) {
  const Vec3 v = eval_sh_rgb<double>(coeffs, dir);
  return v.array();
}

}  // namespace glosskit
