// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "glosskit/lighting.hpp"
#include "glosskit/surfel.hpp"

namespace glosskit {

/// Everything the renderer reads: surfels plus distant lighting.
struct Scene {
  std::vector<Surfel> surfels;
  EnvironmentMap environment;
};

}  // namespace glosskit
