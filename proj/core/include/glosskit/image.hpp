// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "glosskit/common.hpp"

namespace glosskit {

/// Linear RGB image with an optional per-pixel mask in [0, 1].
struct Image {
  int width = 0;
  int height = 0;
  std::vector<Rgb> rgb;
  std::vector<double> alpha;  // empty when the source had no alpha channel

  Image() = default;
  Image(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h, Rgb::Zero()) {}

  std::size_t size() const { return rgb.size(); }
  Rgb& at(int x, int y) { return rgb[static_cast<std::size_t>(y) * width + x]; }
  const Rgb& at(int x, int y) const { return rgb[static_cast<std::size_t>(y) * width + x]; }
};

}  // namespace glosskit
