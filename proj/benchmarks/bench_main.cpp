// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "glosskit/brdf.hpp"
#include "glosskit/render_grad.hpp"
#include "glosskit/synthetic.hpp"

namespace glosskit {
namespace {

Scene sphere_scene(int count) {
  Scene scene;
  SphereOptions o;
  o.count = count;
  scene.surfels = make_sphere(o);
  scene.environment = make_sky(1);
  return scene;
}

Camera bench_camera(int side) {
  return Camera::look_at(Vec3(2.5, -2.0, 1.0), Vec3::Zero(), Vec3(0, 0, 1), 0.8, side, side);
}

void BM_Shade(benchmark::State& state) {
  Surfel s;
  s.roughness = 0.2;
  s.specular_reflectance = Rgb::Constant(0.3);
  const EnvironmentMap env = make_sky(2);
  ShadingOptions opts;
  opts.samples = static_cast<int>(state.range(0));
  opts.ndf = state.range(1) ? NdfModel::WarpedAsg : NdfModel::IsotropicSg;
  const Vec3 wo = Vec3(0.3, -0.2, 1.0).normalized();
  for (auto _ : state) benchmark::DoNotOptimize(shade(s, wo, env, {}, opts));
}
BENCHMARK(BM_Shade)->ArgsProduct({{16, 64, 256}, {0, 1}});

void BM_Transmittance(benchmark::State& state) {
  const auto surfels = make_random_surfels(static_cast<int>(state.range(0)), 3, 2.0, 0.05, 0.4);
  const auto rays = make_random_rays(1024, 4, 2.0);
  const SurfelBvh bvh = SurfelBvh::build(surfels, kDefaultAlphaMin);
  const LeafTest test = state.range(1) ? LeafTest::Hull : LeafTest::AabbOnly;
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(transmittance(rays[i++ % rays.size()], bvh, surfels, kInfinity, -1, test));
  }
}
BENCHMARK(BM_Transmittance)->ArgsProduct({{500, 5000}, {0, 1}});

void BM_BuildBvh(benchmark::State& state) {
  const auto surfels = make_random_surfels(static_cast<int>(state.range(0)), 5, 2.0, 0.05, 0.4);
  for (auto _ : state) benchmark::DoNotOptimize(SurfelBvh::build(surfels, kDefaultAlphaMin));
}
BENCHMARK(BM_BuildBvh)->Arg(500)->Arg(5000);

void BM_Visibility(benchmark::State& state) {
  const Scene scene = sphere_scene(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(precompute_visibility(scene.surfels, kDefaultAlphaMin, 64));
}
BENCHMARK(BM_Visibility)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_Render(benchmark::State& state) {
  const Scene scene = sphere_scene(200);
  const Camera cam = bench_camera(static_cast<int>(state.range(0)));
  RenderOptions ro;
  const VisibilityTable vis = precompute_visibility(scene.surfels, kDefaultAlphaMin, 64);
  for (auto _ : state) benchmark::DoNotOptimize(render(scene, cam, vis, ro));
  state.SetItemsProcessed(state.iterations() * cam.width * cam.height);
}
BENCHMARK(BM_Render)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_RenderBackward(benchmark::State& state) {
  const Scene scene = sphere_scene(200);
  const Camera cam = bench_camera(static_cast<int>(state.range(0)));
  RenderOptions ro;
  const VisibilityTable vis = precompute_visibility(scene.surfels, kDefaultAlphaMin, 64);
  RenderTape tape;
  const RenderBuffers b = render(scene, cam, vis, ro, &tape);
  BufferGrad up(b.size());
  for (Rgb& c : up.color) c = Rgb::Constant(1e-3);
  for (auto _ : state) {
    SceneGrad grad(scene.surfels.size());
    render_backward(scene, tape, up, grad);
    benchmark::DoNotOptimize(grad.surfels.data());
  }
}
BENCHMARK(BM_RenderBackward)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace glosskit

BENCHMARK_MAIN();
