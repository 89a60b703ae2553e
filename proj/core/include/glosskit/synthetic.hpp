// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "glosskit/optimize.hpp"

namespace glosskit {

/// Small deterministic generator; the sequence depends only on the seed
/// (unlike the standard distributions, whose algorithms vary by library).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next();
  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  double normal();                       // standard normal
  Vec3 unit_vector();

 private:
  std::uint64_t state_;
};

struct SphereOptions {
  int count = 200;
  double radius = 1.0;
  Vec3 center = Vec3::Zero();
  double opacity = 0.95;
  double roughness = 0.1;
  Rgb specular = Rgb::Constant(0.3);
  double scale_factor = 0.55;  // scale = factor * mean surfel spacing
  double indirect = 0.02;      // constant indirect radiance
  bool tinted = true;          // albedo varies over the sphere
};

/// Surfels on a Fibonacci sphere, normals facing outward.
std::vector<Surfel> make_sphere(const SphereOptions& options);

/// Smooth sky over a darker ground plus two compact bright lobes whose
/// placement depends on the seed.
EnvironmentMap make_sky(std::uint64_t seed);

/// Cameras on a ring around `target`, alternating between two elevations,
/// all using `up` = +z.
std::vector<Camera> make_orbit(int count, const Vec3& target, double distance,
                               double elevation, double fov_y, int width, int height);

/// Renders every camera with precomputed visibility; masks come from the
/// rendered opacity.
std::vector<View> render_views(const Scene& scene, const std::vector<Camera>& cameras,
                               const RenderOptions& options, double alpha_min);

/// Uniform random surfels in [-extent, extent]^3.
std::vector<Surfel> make_random_surfels(int count, std::uint64_t seed, double extent,
                                        double min_scale, double max_scale);

/// Random rays starting outside the cube of half-size `extent` and aimed at
/// points inside it.
std::vector<Ray> make_random_rays(int count, std::uint64_t seed, double extent);

/// Elongated surfels lying in the z = 0 plane with random in-plane rotation,
/// and rays that skim the plane at a shallow angle.
std::vector<Surfel> make_grazing_surfels(int count, std::uint64_t seed);
std::vector<Ray> make_grazing_rays(int count, std::uint64_t seed);

/// Square grid of surfels in the z = 0 plane facing +z.
std::vector<Surfel> make_plane(int per_side, double spacing);

/// Scrambles appearance (roughness, F0, SH) and returns a blurred, tinted
/// copy of the environment. Geometry is untouched.
void perturb_appearance(Scene& scene, std::uint64_t seed);

}  // namespace glosskit
