// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "glosskit/synthetic.hpp"

#include <algorithm>
#include <cmath>

namespace glosskit {

namespace {

constexpr double kShC0 = 0.28209479177387814;

Surfel oriented_surfel(const Vec3& position, const Vec3& normal, double scale) {
  Surfel s;
  const Mat3 frame = rotation_to<double>(normal);
  s.position = position;
  s.tangent_u = frame.col(0);
  s.tangent_v = frame.col(1);
  s.scale_u = scale;
  s.scale_v = scale;
  return s;
}

}  // namespace

Rng::Rng(std::uint64_t seed) : state_(seed ^ 0x6a09e667f3bcc909ULL) {}

std::uint64_t Rng::next() {
  // splitmix64
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

Vec3 Rng::unit_vector() {
  const double z = uniform(-1.0, 1.0);
  const double phi = uniform(0.0, 2.0 * kPi);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

std::vector<Surfel> make_sphere(const SphereOptions& o) {
  if (o.count < 1 || !(o.radius > 0.0)) throw Error("make_sphere: invalid options");
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  const double spacing = o.radius * std::sqrt(4.0 * kPi / o.count);
  std::vector<Surfel> out;
  out.reserve(o.count);
  for (int k = 0; k < o.count; ++k) {
    const double z = 1.0 - (2.0 * k + 1.0) / o.count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const Vec3 n(r * std::cos(golden * k), r * std::sin(golden * k), z);
    Surfel s = oriented_surfel(o.center + o.radius * n, n, o.scale_factor * spacing);
    s.opacity = o.opacity;
    s.roughness = o.roughness;
    s.specular_reflectance = o.specular;
    Rgb albedo(0.55, 0.35, 0.25);
    if (o.tinted) albedo += Rgb(0.15 * n.x(), 0.1 * n.y(), 0.15 * n.z());
    s.diffuse_sh[0] = albedo / kShC0;
    s.indirect_sh[0] = Rgb::Constant(o.indirect / kShC0);
    out.push_back(s);
  }
  return out;
}

EnvironmentMap make_sky(std::uint64_t seed) {
  Rng rng(seed);
  const Vec3 sun = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.3, 1.0)).normalized();
  const Vec3 fill = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-0.2, 0.5)).normalized();
  EnvironmentMap env;
  for (int r = 0; r < EnvironmentMap::kRows; ++r)
    for (int c = 0; c < EnvironmentMap::kCols; ++c) {
      const Vec3 d = EnvironmentMap::texel_direction(r, c);
      const double up = 0.5 * (d.z() + 1.0);
      Rgb sky = up * Rgb(0.35, 0.45, 0.7) + (1.0 - up) * Rgb(0.18, 0.14, 0.1);
      sky += 3.0 * std::exp(8.0 * (d.dot(sun) - 1.0)) * Rgb(1.0, 0.9, 0.75);
      sky += 1.2 * std::exp(5.0 * (d.dot(fill) - 1.0)) * Rgb(0.5, 0.7, 1.0);
      env.at(r, c) = sky;
    }
  return env;
}

std::vector<Camera> make_orbit(int count, const Vec3& target, double distance, double elevation,
                               double fov_y, int width, int height) {
  std::vector<Camera> cams;
  for (int i = 0; i < count; ++i) {
    const double az = 2.0 * kPi * i / count;
    const double el = (i % 2 == 0 ? 1.0 : -0.5) * elevation;
    const Vec3 eye = target + distance * Vec3(std::cos(el) * std::cos(az),
                                              std::cos(el) * std::sin(az), std::sin(el));
    cams.push_back(Camera::look_at(eye, target, Vec3::UnitZ(), fov_y, width, height));
  }
  return cams;
}

std::vector<View> render_views(const Scene& scene, const std::vector<Camera>& cameras,
                               const RenderOptions& options, double alpha_min) {
  VisibilityTable vis;
  if (options.use_visibility && !options.shading.diffuse_only)
    vis = precompute_visibility(scene.surfels, alpha_min, options.shading.samples);
  std::vector<View> views;
  for (std::size_t i = 0; i < cameras.size(); ++i) {
    const RenderBuffers b = render(scene, cameras[i], vis, options);
    View v;
    v.name = "view_" + std::to_string(i);
    v.camera = cameras[i];
    v.image = Image(b.width, b.height);
    v.image.rgb = b.color;
    v.image.alpha = b.opacity;
    views.push_back(std::move(v));
  }
  return views;
}

std::vector<Surfel> make_random_surfels(int count, std::uint64_t seed, double extent,
                                        double min_scale, double max_scale) {
  Rng rng(seed);
  std::vector<Surfel> out;
  for (int i = 0; i < count; ++i) {
    const Vec3 p(rng.uniform(-extent, extent), rng.uniform(-extent, extent),
                 rng.uniform(-extent, extent));
    Surfel s = oriented_surfel(p, rng.unit_vector(), 1.0);
    // Random in-plane rotation of the tangent pair.
    const double a = rng.uniform(0.0, 2.0 * kPi);
    const Vec3 tu = std::cos(a) * s.tangent_u + std::sin(a) * s.tangent_v;
    const Vec3 tv = -std::sin(a) * s.tangent_u + std::cos(a) * s.tangent_v;
    s.tangent_u = tu;
    s.tangent_v = tv;
    s.scale_u = rng.uniform(min_scale, max_scale);
    s.scale_v = rng.uniform(min_scale, max_scale);
    s.opacity = rng.uniform(0.1, 1.0);
    out.push_back(s);
  }
  return out;
}

std::vector<Ray> make_random_rays(int count, std::uint64_t seed, double extent) {
  Rng rng(seed);
  std::vector<Ray> rays;
  for (int i = 0; i < count; ++i) {
    const Vec3 origin = 3.0 * extent * rng.unit_vector();
    const Vec3 target(rng.uniform(-extent, extent), rng.uniform(-extent, extent),
                      rng.uniform(-extent, extent));
    rays.push_back({origin, (target - origin).normalized()});
  }
  return rays;
}

std::vector<Surfel> make_grazing_surfels(int count, std::uint64_t seed) {
  Rng rng(seed);
  const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count))));
  std::vector<Surfel> out;
  for (int i = 0; i < count; ++i) {
    const double x = (i % side) - 0.5 * (side - 1);
    const double y = (i / side) - 0.5 * (side - 1);
    Surfel s;
    s.position = Vec3(x + rng.uniform(-0.2, 0.2), y + rng.uniform(-0.2, 0.2), 0.0);
    const double a = rng.uniform(0.0, kPi);
    s.tangent_u = Vec3(std::cos(a), std::sin(a), 0.0);
    s.tangent_v = Vec3(-std::sin(a), std::cos(a), 0.0);
    s.scale_u = 0.35;
    s.scale_v = 0.05;
    s.opacity = 0.8;
    out.push_back(s);
  }
  return out;
}

std::vector<Ray> make_grazing_rays(int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Ray> rays;
  for (int i = 0; i < count; ++i) {
    const double az = rng.uniform(0.0, 2.0 * kPi);
    const double tilt = rng.uniform(0.01, 0.08);
    const Vec3 dir(std::cos(az) * std::cos(tilt), std::sin(az) * std::cos(tilt), -std::sin(tilt));
    const Vec3 target(rng.uniform(-5, 5), rng.uniform(-5, 5), 0.0);
    rays.push_back({target - 20.0 * dir, dir});
  }
  return rays;
}

std::vector<Surfel> make_plane(int per_side, double spacing) {
  std::vector<Surfel> out;
  for (int i = 0; i < per_side; ++i)
    for (int j = 0; j < per_side; ++j) {
      Surfel s;
      s.position = Vec3((i - 0.5 * (per_side - 1)) * spacing, (j - 0.5 * (per_side - 1)) * spacing, 0.0);
      s.scale_u = s.scale_v = 0.6 * spacing;
      s.opacity = 0.9;
      s.diffuse_sh[0] = Rgb(0.5, 0.5, 0.5) / kShC0;
      out.push_back(s);
    }
  return out;
}

void perturb_appearance(Scene& scene, std::uint64_t seed) {
  Rng rng(seed);
  for (Surfel& s : scene.surfels) {
    s.roughness = std::clamp(s.roughness * std::exp(0.9 + 0.15 * rng.normal()), 0.02, 1.0);
    for (int c = 0; c < 3; ++c)
      s.specular_reflectance[c] =
          std::clamp(s.specular_reflectance[c] * (0.5 + 0.2 * rng.uniform()), 0.01, 0.99);
    for (Rgb& c : s.diffuse_sh)
      for (int k = 0; k < 3; ++k) c[k] += 0.1 * rng.normal() * (c[k] == 0.0 ? 0.2 : 1.0);
    for (Rgb& c : s.indirect_sh)
      for (int k = 0; k < 3; ++k) c[k] += 0.02 * rng.normal();
  }
  // Environment: box-blurred, darkened and tinted.
  const EnvironmentMap src = scene.environment;
  for (int r = 0; r < EnvironmentMap::kRows; ++r)
    for (int c = 0; c < EnvironmentMap::kCols; ++c) {
      Rgb acc = Rgb::Zero();
      int n = 0;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -2; dc <= 2; ++dc) {
          const int rr = std::clamp(r + dr, 0, EnvironmentMap::kRows - 1);
          const int cc = (c + dc + EnvironmentMap::kCols) % EnvironmentMap::kCols;
          acc += src.at(rr, cc);
          ++n;
        }
      scene.environment.at(r, c) = (acc / n) * Rgb(0.8, 0.85, 0.9);
    }
}

}  // namespace glosskit
