// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "glosskit/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <spdlog/spdlog.h>

namespace glosskit {

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* field) {
    if (!ok) throw Error(std::string("invalid config: ") + field);
  };
  require(stage1_iters >= 0, "stage1_iters must be >= 0");
  require(stage2_iters >= 0, "stage2_iters must be >= 0");
  require(stage3_iters >= 0, "stage3_iters must be >= 0");
  require(weights.dssim >= 0.0 && weights.dssim <= 1.0, "weights.dssim must lie in [0, 1]");
  require(weights.normal >= 0.0, "weights.normal must be >= 0");
  require(weights.light >= 0.0, "weights.light must be >= 0");
  require(weights.alpha >= 0.0, "weights.alpha must be >= 0");
  require(samples >= 1, "samples must be >= 1");
  require(alpha_min > 0.0 && alpha_min < 1.0, "alpha_min must lie in (0, 1)");
  require(iters_scale >= 0.0 && std::isfinite(iters_scale), "iters_scale must be >= 0");
  require(visibility_refresh >= 0, "visibility_refresh must be >= 0");
  require(threads >= 1, "threads must be >= 1");
  for (ParamGroup g : kAllGroups) require(lr.for_group(g) >= 0.0, "learning rates must be >= 0");
}

int TrainConfig::scaled(int iters) const {
  return static_cast<int>(std::lround(iters * iters_scale));
}

std::vector<StagePlan> plan_stages(const TrainConfig& config) {
  auto mask_of = [](std::initializer_list<ParamGroup> groups) {
    GroupMask m{};
    for (ParamGroup g : groups) m[index_of(g)] = true;
    return m;
  };
  std::vector<StagePlan> plans;
  if (!config.phased) {
    StagePlan joint;
    joint.name = "joint";
    joint.iterations = config.scaled(config.stage1_iters) + config.scaled(config.stage2_iters) +
                       config.scaled(config.stage3_iters);
    joint.active = kAllActive;
    joint.terms = {true, config.normal_loss, true, true};
    plans.push_back(joint);
    return plans;
  }
  StagePlan s1;
  s1.name = "stage1";
  s1.iterations = config.scaled(config.stage1_iters);
  s1.active = mask_of({ParamGroup::Position, ParamGroup::Tangents, ParamGroup::Scales,
                       ParamGroup::Opacity, ParamGroup::DiffuseSh});
  s1.terms = {true, false, false, true};
  StagePlan s2;
  s2.name = "stage2";
  s2.iterations = config.scaled(config.stage2_iters);
  s2.active = kAllActive;
  s2.terms = {true, config.normal_loss, true, true};
  StagePlan s3;
  s3.name = "stage3";
  s3.iterations = config.scaled(config.stage3_iters);
  s3.active = mask_of({ParamGroup::Roughness, ParamGroup::Specular, ParamGroup::DiffuseSh,
                       ParamGroup::IndirectSh, ParamGroup::Environment});
  s3.terms = {true, false, true, false};
  s3.freeze_visibility = true;
  plans = {s1, s2, s3};
  return plans;
}

LossReport evaluate_view(const Scene& scene, const View& view, const VisibilityTable& visibility,
                         const RenderOptions& render_options, const LossTerms& terms,
                         const LossWeights& weights, SceneGrad* grad, BranchTrace* branch) {
  const Camera& cam = view.camera;
  if (view.image.width != cam.width || view.image.height != cam.height)
    throw Error("view '" + view.name + "': image size does not match the camera");
  RenderTape tape;
  const RenderBuffers buf =
      render(scene, cam, visibility, render_options, grad ? &tape : nullptr, branch);
  const std::size_t n = buf.size();
  BufferGrad bg(grad ? n : 0);

  LossReport report;
  if (terms.photometric)
    report.photometric = photometric_loss(buf.color, view.image.rgb, cam.width, cam.height,
                                          weights.dssim, bg.color, 1.0, branch);
  if (terms.alpha && !view.image.alpha.empty())
    report.alpha = alpha_loss(buf.opacity, view.image.alpha, bg.opacity, weights.alpha, branch);
  if (terms.normal) {
    const DepthNormals dn = depth_to_normal(buf, cam, branch);
    std::vector<Vec3> g_dn(grad ? n : 0, Vec3::Zero());
    report.normal = normal_loss(buf, dn, bg.normal, g_dn, bg.opacity, weights.normal);
    if (grad) depth_to_normal_backward(buf, cam, dn, g_dn, bg.depth, bg.opacity);
  }
  if (terms.light) {
    report.light = light_reg(scene.environment);
    if (grad) {
      grad->environment.resize(EnvironmentMap::kTexels, Rgb::Zero());
      light_reg_grad(scene.environment, weights.light, grad->environment, branch);
    }
  }
  if (grad) render_backward(scene, tape, bg, *grad);
  return total_loss(report, weights);
}

Adam::Adam(const ParamVector& shape, const LearningRates& lr, double beta1, double beta2,
           double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (ParamGroup g : kAllGroups) {
    m_[g].assign(shape[g].size(), 0.0);
    v_[g].assign(shape[g].size(), 0.0);
  }
}

void Adam::step(ParamVector& params, const ParamVector& grad, const GroupMask& active) {
  for (ParamGroup g : kAllGroups) {
    const int gi = index_of(g);
    if (!active[gi]) continue;
    const int t = ++steps_[gi];
    const double lr = lr_.for_group(g);
    const double c1 = 1.0 - std::pow(beta1_, t);
    const double c2 = 1.0 - std::pow(beta2_, t);
    std::vector<double>& x = params[g];
    std::vector<double>& m = m_[g];
    std::vector<double>& v = v_[g];
    const std::vector<double>& dx = grad[g];
    for (std::size_t i = 0; i < x.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * dx[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * dx[i] * dx[i];
      x[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
  }
}

namespace {

void validate_views(std::span<const View> views) {
  if (views.empty()) throw Error("train: dataset is empty");
  const int w = views.front().image.width;
  const int h = views.front().image.height;
  for (const View& v : views) {
    if (v.image.width != w || v.image.height != h)
      throw Error("train: view '" + v.name + "' has a different image size");
    if (v.camera.width != w || v.camera.height != h)
      throw Error("train: view '" + v.name + "' camera does not match its image");
    if (!v.image.alpha.empty() && v.image.alpha.size() != v.image.rgb.size())
      throw Error("train: view '" + v.name + "' mask size mismatch");
  }
}

// Fisher-Yates with a fixed engine, so the order only depends on the seed.
void shuffle(std::vector<int>& order, std::mt19937_64& rng) {
  for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
    const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
    std::swap(order[i], order[j]);
  }
}

}  // namespace

TrainResult train(const Scene& initial, std::span<const View> views, const TrainConfig& config,
                  const TrainCallback& callback) {
  config.validate();
  validate_views(views);
  TrainResult result;
  result.scene = initial;
  Scene& scene = result.scene;
  for (const Surfel& s : scene.surfels) validate(s);
  scene.environment.validate();

  ParamVector params = encode(scene);
  Adam adam(params, config.lr);
  RenderOptions ropts;
  ropts.shading.samples = config.samples;
  ropts.shading.ndf = config.ndf;
  ropts.use_visibility = config.use_visibility;
  ropts.threads = config.threads;

  std::mt19937_64 rng(config.seed);
  std::vector<int> order(views.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();

  int iteration = 0;
  for (const StagePlan& plan : plan_stages(config)) {
    spdlog::info("{}: {} iterations", plan.name, plan.iterations);
    VisibilityTable visibility;
    for (int it = 0; it < plan.iterations; ++it) {
      const bool refresh = it == 0 || (!plan.freeze_visibility && config.visibility_refresh > 0 &&
                                       it % config.visibility_refresh == 0);
      if (config.use_visibility && refresh)
        visibility = precompute_visibility(scene.surfels, config.alpha_min, config.samples);
      if (cursor == order.size()) {
        shuffle(order, rng);
        cursor = 0;
      }
      const View& view = views[order[cursor++]];

      SceneGrad grad(scene.surfels.size());
      LossReport report =
          evaluate_view(scene, view, visibility, ropts, plan.terms, config.weights, &grad);
      report.iteration = iteration;
      result.history.push_back(report);

      const ParamVector g = raw_gradient(params, grad, plan.active);
      adam.step(params, g, plan.active);
      decode(params, plan.active, scene);
      if (plan.active[index_of(ParamGroup::Tangents)]) {
        std::vector<double>& t = params[ParamGroup::Tangents];
        for (std::size_t i = 0; i < t.size(); ++i)
          t[i] = get_physical(scene, ParamGroup::Tangents, i);
      }
      if (callback) callback(report, scene);
      spdlog::debug("iter {} total {:.6f} photo {:.6f}", iteration, report.total,
                    report.photometric);
      ++iteration;
    }
  }
  return result;
}

GradCheckReport grad_check(const Scene& scene, const View& view, const GradCheckOptions& opt) {
  VisibilityTable visibility;
  if (opt.use_visibility && !opt.render.shading.diffuse_only)
    visibility = precompute_visibility(scene.surfels, opt.alpha_min, opt.render.shading.samples);
  RenderOptions ropts = opt.render;
  ropts.use_visibility = opt.use_visibility;

  auto eval = [&](const Scene& s, std::uint64_t* hash) {
    BranchTrace branch;
    const LossReport r =
        evaluate_view(s, view, visibility, ropts, opt.terms, opt.weights, nullptr, &branch);
    if (hash) *hash = branch.value();
    return r.total;
  };

  SceneGrad grad(scene.surfels.size());
  evaluate_view(scene, view, visibility, ropts, opt.terms, opt.weights, &grad);
  std::uint64_t base_hash = 0;
  eval(scene, &base_hash);

  std::mt19937_64 rng(opt.seed);
  GradCheckReport report;
  for (ParamGroup g : kAllGroups) {
    GroupCheck gc;
    gc.group = g;
    gc.frozen = !opt.active[index_of(g)];
    std::vector<double> analytic = physical_gradient(grad, g);
    if (gc.frozen) std::fill(analytic.begin(), analytic.end(), 0.0);
    if (opt.corrupt && *opt.corrupt == g)
      for (double& a : analytic) a *= 1.5;
    for (double a : analytic) gc.max_abs_analytic = std::max(gc.max_abs_analytic, std::abs(a));
    if (gc.frozen || analytic.empty()) {
      report.groups.push_back(gc);
      continue;
    }

    // Prefer coordinates whose gradient is not negligible within the group.
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < analytic.size(); ++i)
      if (std::abs(analytic[i]) >= 1e-3 * gc.max_abs_analytic) candidates.push_back(i);
    if (gc.max_abs_analytic == 0.0) {
      candidates.resize(analytic.size());
      std::iota(candidates.begin(), candidates.end(), std::size_t{0});
    }
    std::vector<int> picks(candidates.size());
    std::iota(picks.begin(), picks.end(), 0);
    shuffle(picks, rng);

    const double floor = 1e-6 * gc.max_abs_analytic + 1e-12;
    int attempts = 0;
    for (std::size_t p = 0; p < picks.size() && gc.checked < opt.per_group &&
                            attempts < opt.max_attempts;
         ++p, ++attempts) {
      const std::size_t idx = candidates[picks[p]];
      Scene plus = scene, minus = scene;
      const double x = get_physical(scene, g, idx);
      set_physical(plus, g, idx, x + opt.step);
      set_physical(minus, g, idx, x - opt.step);
      std::uint64_t hp = 0, hm = 0;
      const double lp = eval(plus, &hp);
      const double lm = eval(minus, &hm);
      if (hp != base_hash || hm != base_hash) {
        ++gc.skipped;
        continue;
      }
      const double fd = (lp - lm) / (2.0 * opt.step);
      const double a = analytic[idx];
      const double err = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), floor});
      gc.max_rel_error = std::max(gc.max_rel_error, err);
      ++gc.checked;
    }
    gc.passed = gc.checked > 0 && gc.max_rel_error <= opt.tolerance;
    report.passed = report.passed && gc.passed;
    report.groups.push_back(gc);
  }
  return report;
}

}  // namespace glosskit
