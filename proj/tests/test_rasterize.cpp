// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "glosskit/rasterize.hpp"

#include <algorithm>
#include <numeric>

#include <gtest/gtest.h>

#include "glosskit/sh.hpp"
#include "test_util.hpp"

namespace glosskit {
namespace {

TEST(SplatAlpha, Examples) {
  Surfel s;
  s.opacity = 0.8;
  EXPECT_DOUBLE_EQ(splat_alpha(s, 0, 0), 0.8);
  EXPECT_NEAR(splat_alpha(s, 1, 1), 0.2943, 1e-4);
  s.opacity = 0.0;
  EXPECT_EQ(splat_alpha(s, 0.3, -2.0), 0.0);
}

CompositeHit hit(double t, double alpha, const Rgb& c, int index = 0) {
  CompositeHit h;
  h.t = t;
  h.alpha = alpha;
  h.color = c;
  h.normal = Vec3(0, 0, 1);
  h.index = index;
  return h;
}

TEST(CompositePixel, OneHit) {
  const std::vector<CompositeHit> hits = {hit(1.0, 0.5, Rgb(1, 0, 0))};
  const CompositeResult r = composite_pixel(hits);
  EXPECT_TRUE(r.color.isApprox(Rgb(0.5, 0, 0)));
  EXPECT_DOUBLE_EQ(r.opacity, 0.5);
}

TEST(CompositePixel, TwoHits) {
  const std::vector<CompositeHit> hits = {hit(1.0, 0.5, Rgb(1, 0, 0)),
                                          hit(2.0, 0.5, Rgb(0, 1, 0), 1)};
  const CompositeResult r = composite_pixel(hits);
  EXPECT_TRUE(r.color.isApprox(Rgb(0.5, 0.25, 0)));
  EXPECT_DOUBLE_EQ(r.opacity, 0.75);
  EXPECT_DOUBLE_EQ(r.depth, 0.5 * 1.0 + 0.25 * 2.0);
}

TEST(CompositePixel, EmptyIsBackground) {
  const CompositeResult r = composite_pixel({});
  EXPECT_TRUE(r.color.isZero(0.0));
  EXPECT_EQ(r.opacity, 0.0);
  EXPECT_EQ(r.depth, 0.0);
  EXPECT_TRUE(r.normal.isZero(0.0));
}

TEST(CompositePixel, UnsortedThrows) {
  const std::vector<CompositeHit> hits = {hit(2.0, 0.5, Rgb(1, 0, 0)),
                                          hit(1.0, 0.5, Rgb(0, 1, 0))};
  EXPECT_THROW(composite_pixel(hits), Error);
}

TEST(CompositePixel, TelescopingOpacity) {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<CompositeHit> hits;
    const int n = 1 + static_cast<int>(rng.uniform() * 12);
    double t = 0.0;
    double product = 1.0;
    for (int i = 0; i < n; ++i) {
      t += rng.uniform(0.01, 1.0);
      const double a = rng.uniform(kAlphaCutoff, 0.6);
      hits.push_back(hit(t, a, Rgb::Constant(rng.uniform()), i));
      product *= 1.0 - a;
    }
    const CompositeResult r = composite_pixel(hits);
    if (product >= kTransmittanceStop) {
      EXPECT_NEAR(r.opacity, 1.0 - product, 1e-9);
    }
    double weights = 0.0, trans = 1.0;
    for (const CompositeHit& h : hits) {
      weights += trans * h.alpha;
      trans *= 1.0 - h.alpha;
      if (trans < kTransmittanceStop) break;
    }
    EXPECT_NEAR(r.opacity, weights, 1e-12);
  }
}

TEST(CompositePixel, SkipsBelowCutoffAndStopsWhenOpaque) {
  const std::vector<CompositeHit> faint = {hit(1.0, 0.5 * kAlphaCutoff, Rgb(1, 1, 1)),
                                           hit(2.0, 0.5, Rgb(0, 1, 0), 1)};
  EXPECT_TRUE(composite_pixel(faint).color.isApprox(Rgb(0, 0.5, 0)));
  const std::vector<CompositeHit> opaque = {hit(1.0, 1.0, Rgb(1, 0, 0)),
                                            hit(2.0, 0.9, Rgb(0, 1, 0), 1)};
  const CompositeResult r = composite_pixel(opaque);
  EXPECT_TRUE(r.color.isApprox(Rgb(1, 0, 0)));
  EXPECT_EQ(r.depth, 1.0);
}

TEST(CompositePixel, EqualDepthPermutationInvariant) {
  Rng rng(22);
  std::vector<CompositeHit> hits;
  for (int i = 0; i < 6; ++i)
    hits.push_back(hit(i < 4 ? 1.0 : 2.0, rng.uniform(0.1, 0.6), Rgb::Constant(rng.uniform()), i));
  const CompositeResult base = composite_pixel(hits);
  auto order = [](const CompositeHit& a, const CompositeHit& b) {
    return a.t != b.t ? a.t < b.t : a.index < b.index;
  };
  for (int k = 0; k < 20; ++k) {
    std::vector<CompositeHit> shuffled = hits;
    for (std::size_t i = shuffled.size() - 1; i > 0; --i)
      std::swap(shuffled[i], shuffled[static_cast<std::size_t>(rng.uniform() * (i + 1))]);
    std::sort(shuffled.begin(), shuffled.end(), order);
    const CompositeResult r = composite_pixel(shuffled);
    EXPECT_EQ((r.color - base.color).abs().maxCoeff(), 0.0);
    EXPECT_EQ(r.opacity, base.opacity);
  }
}

TEST(CompositePixel, AddingHitNeverDecreasesOpacity) {
  Rng rng(23);
  std::vector<CompositeHit> hits;
  double last = 0.0;
  for (int i = 0; i < 30; ++i) {
    hits.push_back(hit(i + 1.0, rng.uniform(0.0, 0.5), Rgb::Ones(), i));
    const double o = composite_pixel(hits).opacity;
    EXPECT_GE(o, last);
    last = o;
  }
}

// Independent per-pixel integrator: no BVH, plane hits from a direct 3x3
// solve, and compositing written out inline.
RenderBuffers brute_force_render(const Scene& scene, const Camera& cam, const ShadingOptions& opts) {
  RenderBuffers out(cam.width, cam.height);
  for (int y = 0; y < cam.height; ++y)
    for (int x = 0; x < cam.width; ++x) {
      const Ray ray = pixel_ray(cam, Vec2(x + 0.5, y + 0.5));
      struct H {
        double t, alpha;
        int i;
      };
      std::vector<H> hs;
      for (int i = 0; i < static_cast<int>(scene.surfels.size()); ++i) {
        const Surfel& s = scene.surfels[i];
        Mat3 a;
        a.col(0) = s.scale_u * s.tangent_u;
        a.col(1) = s.scale_v * s.tangent_v;
        a.col(2) = -ray.direction;
        if (std::abs(ray.direction.dot(normal_of(s))) < 1e-9) continue;
        const Vec3 sol = a.colPivHouseholderQr().solve(ray.origin - s.position);
        if (sol.z() <= 0.0) continue;
        const double r2 = sol.x() * sol.x() + sol.y() * sol.y();
        if (r2 > 9.0) continue;
        const double alpha = s.opacity * std::exp(-0.5 * r2);
        if (alpha < 1.0 / 255.0) continue;
        hs.push_back({sol.z(), alpha, i});
      }
      std::sort(hs.begin(), hs.end(), [](const H& a, const H& b) {
        return a.t != b.t ? a.t < b.t : a.i < b.i;
      });
      double trans = 1.0;
      const int pix = out.index(x, y);
      for (const H& h : hs) {
        const Surfel& s = scene.surfels[h.i];
        const Vec3 wo = -ray.direction;
        const Rgb c = shade(s, wo, scene.environment, {}, opts);
        Vec3 n = normal_of(s);
        if (n.dot(wo) < 0.0) n = -n;
        const double w = trans * h.alpha;
        out.color[pix] += w * c;
        out.normal[pix] += w * n;
        out.depth[pix] += w * h.t * ray.direction.dot(cam.forward());
        trans *= 1.0 - h.alpha;
        if (trans < 1e-4) break;
      }
      out.opacity[pix] = 1.0 - trans;
    }
  return out;
}

Scene mini_scene(std::uint64_t seed, int n) {
  Rng rng(seed);
  Scene scene;
  for (int i = 0; i < n; ++i) {
    Surfel s = testing::random_surfel(rng);
    s.position *= 0.6;
    scene.surfels.push_back(s);
  }
  scene.environment = make_sky(seed);
  return scene;
}

double max_abs_diff(const RenderBuffers& a, const RenderBuffers& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, (a.color[i] - b.color[i]).abs().maxCoeff());
    m = std::max(m, std::abs(a.depth[i] - b.depth[i]));
    m = std::max(m, (a.normal[i] - b.normal[i]).cwiseAbs().maxCoeff());
    m = std::max(m, std::abs(a.opacity[i] - b.opacity[i]));
  }
  return m;
}

const Camera kCam = Camera::look_at(Vec3(0.4, -3.0, 1.2), Vec3::Zero(), Vec3(0, 0, 1), 0.9, 32, 24);

TEST(Render, OneSurfelMatchesBruteForce) {
  Scene scene = mini_scene(31, 1);
  scene.surfels[0].position = Vec3::Zero();
  scene.surfels[0].scale_u = scene.surfels[0].scale_v = 0.6;
  RenderOptions ro;
  const RenderBuffers a = render(scene, kCam, {}, ro);
  const RenderBuffers b = brute_force_render(scene, kCam, ro.shading);
  EXPECT_LT(max_abs_diff(a, b), 1e-6);
  EXPECT_GT(*std::max_element(a.opacity.begin(), a.opacity.end()), 0.1);
}

TEST(Render, MiniSceneMatchesBruteForce) {
  const Scene scene = mini_scene(32, 25);
  RenderOptions ro;
  EXPECT_LT(max_abs_diff(render(scene, kCam, {}, ro), brute_force_render(scene, kCam, ro.shading)),
            1e-6);
}

TEST(Render, DiffuseOnlyMatchesPlainSplatting) {
  const Scene scene = mini_scene(33, 25);
  RenderOptions ro;
  ro.shading.diffuse_only = true;
  const RenderBuffers a = render(scene, kCam, {}, ro);
  const RenderBuffers b = brute_force_render(scene, kCam, ro.shading);
  EXPECT_LT(max_abs_diff(a, b), 1e-6);
  // The shaded color of a diffuse-only hit is the clamped SH alone.
  const Surfel& s = scene.surfels[0];
  const Vec3 wo = Vec3(0.2, 0.3, 0.9).normalized();
  EXPECT_TRUE(shade(s, wo, scene.environment, {}, ro.shading)
                  .isApprox(eval_sh(s.diffuse_sh, wo).max(0.0)));
}

TEST(Render, FrontoParallelDiffuseCenterPixel) {
  Scene scene;
  Surfel s;
  s.opacity = 0.7;
  s.scale_u = s.scale_v = 0.3;
  s.diffuse_sh[0] = Rgb(0.4, 0.5, 0.6) / 0.28209479177387814;
  scene.surfels.push_back(s);
  const Camera cam = Camera::look_at(Vec3(0, 0, 4), Vec3::Zero(), Vec3(0, 1, 0), 0.5, 17, 17);
  const RenderBuffers b = render(scene, cam, {}, RenderOptions{});
  const int c = b.index(8, 8);
  EXPECT_NEAR(b.opacity[c], 0.7, 1e-12);
  EXPECT_TRUE(b.color[c].isApprox(0.7 * Rgb(0.4, 0.5, 0.6), 1e-12));
  EXPECT_NEAR(b.depth[c], 0.7 * 4.0, 1e-12);
  EXPECT_TRUE(b.normal[c].isApprox(Vec3(0, 0, 0.7), 1e-12));
}

TEST(Render, EmptySceneIsBackground) {
  const RenderBuffers b = render(Scene{}, kCam, {}, RenderOptions{});
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_TRUE(b.color[i].isZero(0.0));
    EXPECT_EQ(b.opacity[i], 0.0);
  }
}

TEST(Render, DeterministicAndThreadIndependent) {
  const Scene scene = mini_scene(34, 40);
  RenderOptions one, many;
  many.threads = 8;
  const RenderBuffers a = render(scene, kCam, {}, one);
  const RenderBuffers b = render(scene, kCam, {}, one);
  const RenderBuffers c = render(scene, kCam, {}, many);
  EXPECT_EQ(max_abs_diff(a, b), 0.0);
  EXPECT_EQ(max_abs_diff(a, c), 0.0);
}

TEST(Render, BufferInvariants) {
  const Scene scene = mini_scene(35, 40);
  const RenderBuffers b = render(scene, kCam, {}, RenderOptions{});
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_GE(b.opacity[i], 0.0);
    EXPECT_LE(b.opacity[i], 1.0);
    if (b.opacity[i] > 0.5) {
      EXPECT_GT(b.normal[i].norm(), 0.0);
      EXPECT_LE(b.normal[i].norm(), 1.0 + 1e-6);
    }
  }
}

TEST(Render, VisibilityTableMustMatch) {
  const Scene scene = mini_scene(36, 5);
  VisibilityTable bad;
  bad.samples = 64;
  bad.values.assign(64 * 4, 1.0);
  EXPECT_THROW(render(scene, kCam, bad, RenderOptions{}), Error);
}

// Buffers for a camera at the origin looking down +z with a given
// camera-space depth function of the ray direction.
RenderBuffers depth_buffers(const Camera& cam, const std::function<double(double, double)>& z) {
  RenderBuffers b(cam.width, cam.height);
  for (int y = 0; y < cam.height; ++y)
    for (int x = 0; x < cam.width; ++x) {
      const double a = (x + 0.5 - cam.cx) / cam.fx;
      const double c = (y + 0.5 - cam.cy) / cam.fy;
      b.depth[b.index(x, y)] = z(a, c);
      b.opacity[b.index(x, y)] = 1.0;
    }
  return b;
}

Camera origin_camera() {
  Camera cam;
  cam.width = cam.height = 16;
  cam.fx = cam.fy = 20.0;
  cam.cx = cam.cy = 8.0;
  return cam;
}

TEST(DepthToNormal, ConstantDepthFacesCamera) {
  const Camera cam = origin_camera();
  const DepthNormals n = depth_to_normal(depth_buffers(cam, [](double, double) { return 2.0; }), cam);
  for (std::size_t i = 0; i < n.normal.size(); ++i) {
    ASSERT_TRUE(n.valid[i]);
    EXPECT_TRUE(n.normal[i].isApprox(Vec3(0, 0, -1), 1e-12));
  }
}

TEST(DepthToNormal, SlantedPlane) {
  const Camera cam = origin_camera();
  // z = 1 + 0.1 x_cam along the ray (a, c, 1): z = 1 / (1 - 0.1 a).
  const DepthNormals n =
      depth_to_normal(depth_buffers(cam, [](double a, double) { return 1.0 / (1.0 - 0.1 * a); }), cam);
  const Vec3 expected = Vec3(0.1, 0.0, -1.0).normalized();
  for (std::size_t i = 0; i < n.normal.size(); ++i) {
    ASSERT_TRUE(n.valid[i]);
    EXPECT_LT((n.normal[i] - expected).norm(), 1e-3);
  }
}

TEST(DepthToNormal, RotatedCameraReturnsWorldNormals) {
  Camera cam = origin_camera();
  cam.rotation = Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
  const DepthNormals n = depth_to_normal(depth_buffers(cam, [](double, double) { return 3.0; }), cam);
  const Vec3 expected = -cam.forward();
  for (std::size_t i = 0; i < n.normal.size(); ++i)
    EXPECT_TRUE(n.normal[i].isApprox(expected, 1e-12));
}

TEST(DepthToNormal, SpikeAndInvalidMask) {
  const Camera cam = origin_camera();
  RenderBuffers b = depth_buffers(cam, [](double, double) { return 2.0; });
  b.depth[b.index(8, 8)] = 2.5;
  b.opacity[b.index(3, 3)] = 0.3;
  b.depth[b.index(3, 3)] *= 0.3;
  const DepthNormals n = depth_to_normal(b, cam);
  const Vec3 flat(0, 0, -1);
  EXPECT_GT((n.normal[b.index(7, 8)] - flat).norm(), 1e-2);
  EXPECT_GT((n.normal[b.index(8, 7)] - flat).norm(), 1e-2);
  EXPECT_TRUE(n.normal[b.index(12, 12)].isApprox(flat, 1e-12));
  EXPECT_FALSE(n.valid[b.index(3, 3)]);
  EXPECT_TRUE(n.normal[b.index(3, 3)].isZero(0.0));
  // Neighbours of the invalid pixel fall back to one-sided differences.
  EXPECT_TRUE(n.valid[b.index(4, 3)]);
  EXPECT_TRUE(n.normal[b.index(4, 3)].isApprox(flat, 1e-12));
}

TEST(DepthToNormal, BackwardMatchesFiniteDifferences) {
  const Camera cam = origin_camera();
  Rng rng(37);
  RenderBuffers b = depth_buffers(cam, [&](double a, double c) {
    return 2.0 + 0.3 * a - 0.2 * c + 0.05 * std::sin(7 * a);
  });
  for (std::size_t i = 0; i < b.size(); ++i) {
    b.opacity[i] = rng.uniform(0.6, 1.0);
    b.depth[i] *= b.opacity[i];
  }
  std::vector<Vec3> g(b.size());
  for (Vec3& v : g) v = rng.unit_vector();
  auto objective = [&](const RenderBuffers& buf) {
    const DepthNormals n = depth_to_normal(buf, cam);
    double sum = 0.0;
    for (std::size_t i = 0; i < buf.size(); ++i)
      if (n.valid[i]) sum += g[i].dot(n.normal[i]);
    return sum;
  };
  const DepthNormals n = depth_to_normal(b, cam);
  std::vector<double> gd(b.size(), 0.0), go(b.size(), 0.0);
  depth_to_normal_backward(b, cam, n, g, gd, go);
  for (int pix : {0, 17, 40, 136, 255}) {
    RenderBuffers p = b;
    auto f_depth = [&](double v) {
      p.depth[pix] = v;
      return objective(p);
    };
    const double fd = testing::central_difference(f_depth, b.depth[pix], 1e-6);
    EXPECT_LT(testing::rel_error(gd[pix], fd, 1e-6), 1e-5) << pix;
    p = b;
    auto f_opacity = [&](double v) {
      p.opacity[pix] = v;
      return objective(p);
    };
    const double fo = testing::central_difference(f_opacity, b.opacity[pix], 1e-6);
    EXPECT_LT(testing::rel_error(go[pix], fo, 1e-6), 1e-5) << pix;
  }
}

}  // namespace
}  // namespace glosskit
