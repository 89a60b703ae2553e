// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "glosskit/optimize.hpp"

#include <numeric>

#include <gtest/gtest.h>

#include "glosskit/synthetic.hpp"
#include "test_util.hpp"

namespace glosskit {
namespace {

struct Fixture {
  Scene truth;
  Scene initial;
  std::vector<View> views;
};

Fixture small_fit(int surfels = 40, int size = 20, int n_views = 2) {
  Fixture f;
  SphereOptions so;
  so.count = surfels;
  f.truth.surfels = make_sphere(so);
  f.truth.environment = make_sky(3);
  const auto cams = make_orbit(n_views, Vec3::Zero(), 3.5, 0.3, 0.8, size, size);
  RenderOptions ro;
  ro.shading.samples = 16;
  f.views = render_views(f.truth, cams, ro, kDefaultAlphaMin);
  f.initial = f.truth;
  perturb_appearance(f.initial, 9);
  return f;
}

TrainConfig quick_config(double scale) {
  TrainConfig c;
  c.samples = 16;
  c.iters_scale = scale;
  c.seed = 5;
  return c;
}

Scene one_surfel_scene() {
  Scene scene;
  Surfel s;
  s.position = Vec3(0.05, -0.03, 0.0);
  s.tangent_u = Vec3(1, 0.1, 0).normalized();
  s.tangent_v = Vec3(-0.1, 1, 0.2).normalized();
  s.tangent_v = (s.tangent_v - s.tangent_u * s.tangent_u.dot(s.tangent_v)).normalized();
  s.scale_u = 0.6;
  s.scale_v = 0.4;
  s.opacity = 0.8;
  s.roughness = 0.3;
  s.specular_reflectance = Rgb(0.2, 0.3, 0.4);
  s.diffuse_sh[0] = Rgb(1.2, 0.9, 0.7);
  s.diffuse_sh[2] = Rgb(0.2, -0.1, 0.1);
  s.indirect_sh[0] = Rgb(0.2, 0.2, 0.2);
  scene.surfels.push_back(s);
  scene.environment = make_sky(4);
  return scene;
}

View target_view(int size) {
  View v;
  v.name = "target";
  v.camera = Camera::look_at(Vec3(0.3, -0.4, 2.5), Vec3::Zero(), Vec3(0, 1, 0), 0.7, size, size);
  v.image = Image(size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      v.image.rgb[y * size + x] = Rgb(0.3 + 0.01 * x, 0.2 + 0.01 * y, 0.25);
  v.image.alpha.assign(static_cast<std::size_t>(size) * size, 0.0);
  for (int y = size / 4; y < 3 * size / 4; ++y)
    for (int x = size / 4; x < 3 * size / 4; ++x) v.image.alpha[y * size + x] = 1.0;
  return v;
}

TEST(PlanStages, ScalingAndMasks) {
  TrainConfig c;
  c.iters_scale = 0.01;
  const auto plans = plan_stages(c);
  ASSERT_EQ(plans.size(), 3u);
  EXPECT_EQ(plans[0].iterations, 70);
  EXPECT_EQ(plans[1].iterations, 180);
  EXPECT_EQ(plans[2].iterations, 150);
  c.iters_scale = 1.0;
  EXPECT_EQ(plan_stages(c)[1].iterations, 18000);

  const GroupMask& m1 = plans[0].active;
  for (ParamGroup g : kAllGroups)
    EXPECT_EQ(m1[index_of(g)], is_geometry(g) || g == ParamGroup::DiffuseSh) << group_name(g);
  EXPECT_TRUE(plans[0].terms.photometric && plans[0].terms.alpha);
  EXPECT_FALSE(plans[0].terms.normal || plans[0].terms.light);

  EXPECT_EQ(plans[1].active, kAllActive);
  EXPECT_TRUE(plans[1].terms.photometric && plans[1].terms.normal && plans[1].terms.light);

  for (ParamGroup g : kAllGroups) EXPECT_EQ(plans[2].active[index_of(g)], !is_geometry(g));
  EXPECT_TRUE(plans[2].terms.photometric && plans[2].terms.light);
  EXPECT_FALSE(plans[2].terms.normal || plans[2].terms.alpha);
  EXPECT_TRUE(plans[2].freeze_visibility);

  c.normal_loss = false;
  for (const StagePlan& p : plan_stages(c)) EXPECT_FALSE(p.terms.normal);
  c.phased = false;
  c.iters_scale = 0.01;
  const auto joint = plan_stages(c);
  ASSERT_EQ(joint.size(), 1u);
  EXPECT_EQ(joint[0].iterations, 400);
  EXPECT_EQ(joint[0].active, kAllActive);
}

TEST(TrainConfig, ValidateNamesField) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.samples = 0;
  try {
    c.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("samples"), std::string::npos);
  }
  c = TrainConfig{};
  c.lr.for_group(ParamGroup::Roughness) = -1.0;
  EXPECT_THROW(c.validate(), Error);
  c = TrainConfig{};
  c.iters_scale = -0.5;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  ParamVector p;
  for (ParamGroup g : kAllGroups) p[g] = {1.0, -2.0};
  ParamVector grad = p;
  for (ParamGroup g : kAllGroups) grad[g] = {3.0, -1e-3};
  LearningRates lr;
  Adam adam(p, lr);
  GroupMask mask{};
  mask[index_of(ParamGroup::Opacity)] = true;
  const ParamVector before = p;
  adam.step(p, grad, mask);
  const double r = lr.for_group(ParamGroup::Opacity);
  EXPECT_NEAR(p[ParamGroup::Opacity][0], 1.0 - r, 1e-12);
  EXPECT_NEAR(p[ParamGroup::Opacity][1], -2.0 + r, 1e-9);
  for (ParamGroup g : kAllGroups)
    if (g != ParamGroup::Opacity) EXPECT_EQ(p[g], before[g]);
}

TEST(Adam, ConvergesOnQuadratic) {
  ParamVector p;
  p[ParamGroup::Roughness] = {4.0, -3.0};
  LearningRates lr;
  lr.for_group(ParamGroup::Roughness) = 0.05;
  Adam adam(p, lr);
  GroupMask mask{};
  mask[index_of(ParamGroup::Roughness)] = true;
  for (int i = 0; i < 2000; ++i) {
    ParamVector g = p;
    g[ParamGroup::Roughness] = {2 * (p[ParamGroup::Roughness][0] - 1.0),
                                2 * (p[ParamGroup::Roughness][1] + 0.5)};
    adam.step(p, g, mask);
  }
  EXPECT_NEAR(p[ParamGroup::Roughness][0], 1.0, 1e-2);
  EXPECT_NEAR(p[ParamGroup::Roughness][1], -0.5, 1e-2);
}

TEST(Train, ZeroIterationsLeavesSceneUnchanged) {
  const Fixture f = small_fit();
  const TrainResult r = train(f.initial, f.views, quick_config(0.0));
  EXPECT_TRUE(r.history.empty());
  for (ParamGroup g : kAllGroups)
    for (std::size_t i = 0; i < physical_count(f.initial, g); ++i)
      ASSERT_EQ(get_physical(r.scene, g, i), get_physical(f.initial, g, i)) << group_name(g);
}

TEST(Train, StageThreeKeepsGeometryBitIdentical) {
  const Fixture f = small_fit();
  TrainConfig c = quick_config(1.0);
  c.stage1_iters = 0;
  c.stage2_iters = 0;
  c.stage3_iters = 6;
  const TrainResult r = train(f.initial, f.views, c);
  ASSERT_EQ(r.history.size(), 6u);
  bool appearance_moved = false;
  for (ParamGroup g : kAllGroups)
    for (std::size_t i = 0; i < physical_count(f.initial, g); ++i) {
      if (is_geometry(g))
        ASSERT_EQ(get_physical(r.scene, g, i), get_physical(f.initial, g, i)) << group_name(g);
      else if (get_physical(r.scene, g, i) != get_physical(f.initial, g, i))
        appearance_moved = true;
    }
  EXPECT_TRUE(appearance_moved);
}

TEST(Train, StageOneKeepsMaterialsBitIdentical) {
  const Fixture f = small_fit();
  TrainConfig c = quick_config(1.0);
  c.stage1_iters = 5;
  c.stage2_iters = 0;
  c.stage3_iters = 0;
  const TrainResult r = train(f.initial, f.views, c);
  for (ParamGroup g : {ParamGroup::Roughness, ParamGroup::Specular, ParamGroup::IndirectSh,
                       ParamGroup::Environment})
    for (std::size_t i = 0; i < physical_count(f.initial, g); ++i)
      ASSERT_EQ(get_physical(r.scene, g, i), get_physical(f.initial, g, i)) << group_name(g);
}

TEST(Train, DeterministicForSeedAndThreads) {
  const Fixture f = small_fit();
  TrainConfig c = quick_config(0.002);  // 14 / 36 / 30
  const TrainResult a = train(f.initial, f.views, c);
  c.threads = 3;
  const TrainResult b = train(f.initial, f.views, c);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) ASSERT_EQ(a.history[i].total, b.history[i].total);
  for (ParamGroup g : kAllGroups)
    for (std::size_t i = 0; i < physical_count(a.scene, g); ++i)
      ASSERT_EQ(get_physical(a.scene, g, i), get_physical(b.scene, g, i));
}

TEST(Train, SmoothedLossDecreasesWithinEachStage) {
  const Fixture f = small_fit(40, 20, 1);
  const TrainConfig c = quick_config(0.004);  // 28 / 72 / 60
  const TrainResult r = train(f.initial, f.views, c);
  const auto plans = plan_stages(c);
  std::size_t start = 0;
  for (const StagePlan& p : plans) {
    const std::size_t n = static_cast<std::size_t>(p.iterations);
    const std::size_t w = n / 4;
    auto mean = [&](std::size_t from) {
      double s = 0.0;
      for (std::size_t i = from; i < from + w; ++i) s += r.history[i].total;
      return s / static_cast<double>(w);
    };
    EXPECT_LT(mean(start + n - w), mean(start)) << p.name;
    start += n;
  }
}

TEST(Train, RejectsBadViews) {
  Fixture f = small_fit();
  EXPECT_THROW(train(f.initial, {}, quick_config(0.0)), Error);
  f.views[1].image = Image(5, 5);
  EXPECT_THROW(train(f.initial, f.views, quick_config(0.0)), Error);
}

TEST(GradCheck, DiffuseOnlySurfelIsTight) {
  const Scene scene = one_surfel_scene();
  GradCheckOptions o;
  o.render.shading.diffuse_only = true;
  o.terms = {true, false, false, true};
  o.step = 1e-5;
  o.tolerance = 1e-6;
  const GradCheckReport r = grad_check(scene, target_view(24), o);
  EXPECT_TRUE(r.passed);
  for (const GroupCheck& g : r.groups)
    if (is_geometry(g.group) || g.group == ParamGroup::DiffuseSh)
      EXPECT_GT(g.checked, 0) << group_name(g.group) << " err " << g.max_rel_error;
}

TEST(GradCheck, FullShadingPassesEveryGroup) {
  const Scene scene = one_surfel_scene();
  GradCheckOptions o;
  o.render.shading.samples = 16;
  const GradCheckReport r = grad_check(scene, target_view(24), o);
  ASSERT_EQ(r.groups.size(), static_cast<std::size_t>(kGroupCount));
  for (std::size_t i = 0; i < r.groups.size(); ++i) {
    const GroupCheck& g = r.groups[i];
    EXPECT_EQ(g.group, kAllGroups[i]);
    EXPECT_TRUE(g.passed) << group_name(g.group) << " err " << g.max_rel_error;
    EXPECT_GT(g.checked, 0) << group_name(g.group);
  }
  EXPECT_TRUE(r.passed);
}

TEST(GradCheck, FrozenGroupsReportZero) {
  const Scene scene = one_surfel_scene();
  GradCheckOptions o;
  o.render.shading.samples = 16;
  o.active = GroupMask{};
  o.active[index_of(ParamGroup::Roughness)] = true;
  const GradCheckReport r = grad_check(scene, target_view(16), o);
  for (const GroupCheck& g : r.groups) {
    if (g.group == ParamGroup::Roughness) {
      EXPECT_FALSE(g.frozen);
      EXPECT_TRUE(g.passed);
    } else {
      EXPECT_TRUE(g.frozen);
      EXPECT_EQ(g.max_abs_analytic, 0.0);
    }
  }
}

TEST(GradCheck, CorruptedGradientFails) {
  const Scene scene = one_surfel_scene();
  GradCheckOptions o;
  o.render.shading.samples = 16;
  o.corrupt = ParamGroup::Roughness;
  const GradCheckReport r = grad_check(scene, target_view(16), o);
  EXPECT_FALSE(r.passed);
  for (const GroupCheck& g : r.groups)
    EXPECT_EQ(g.passed, g.group != ParamGroup::Roughness) << group_name(g.group);
}

}  // namespace
}  // namespace glosskit
