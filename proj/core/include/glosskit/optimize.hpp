// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "glosskit/image.hpp"
#include "glosskit/losses.hpp"
#include "glosskit/params.hpp"

namespace glosskit {

/// One posed training image. `image.alpha`, when present, is the object mask.
struct View {
  std::string name;
  Camera camera;
  Image image;
};

/// Adam step size per parameter group, indexed in kAllGroups order.
struct LearningRates {
  std::array<double, kGroupCount> rates = {
      1.6e-4,  // position
      1e-3,    // tangents
      5e-3,    // scales
      5e-2,    // opacity
      2.5e-3,  // roughness
      2.5e-3,  // specular
      2.5e-3,  // diffuse_sh
      2.5e-3,  // indirect_sh
      1e-2,    // environment
  };

  double for_group(ParamGroup g) const { return rates[index_of(g)]; }
  double& for_group(ParamGroup g) { return rates[index_of(g)]; }
};

struct TrainConfig {
  int stage1_iters = 7000;
  int stage2_iters = 18000;
  int stage3_iters = 15000;
  LearningRates lr;
  LossWeights weights;
  int samples = 64;
  double alpha_min = kDefaultAlphaMin;
  std::uint64_t seed = 0;
  double iters_scale = 1.0;
  NdfModel ndf = NdfModel::WarpedAsg;
  bool normal_loss = true;
  bool phased = true;
  bool use_visibility = true;
  int visibility_refresh = 1000;  // iterations between visibility updates in stages 1-2
  int threads = 1;

  /// Throws Error naming the first invalid field.
  void validate() const;
  /// round(iters * iters_scale).
  int scaled(int iters) const;
};

/// Loss terms enabled in a stage.
struct LossTerms {
  bool photometric = true;
  bool normal = false;
  bool light = false;
  bool alpha = false;
};

struct StagePlan {
  std::string name;
  int iterations = 0;
  GroupMask active{};
  LossTerms terms;
  bool freeze_visibility = false;  // computed once at stage start
};

/// Stage 1: geometry + diffuse SH with photometric + alpha. Stage 2: all
/// groups, adds the normal and light terms. Stage 3: geometry frozen,
/// appearance and environment with photometric + light. Without phases, a
/// single stage runs every group and term for the summed length.
std::vector<StagePlan> plan_stages(const TrainConfig& config);

/// Loss of one view; when `grad` is given, accumulates dL/d(scene).
LossReport evaluate_view(const Scene& scene, const View& view, const VisibilityTable& visibility,
                         const RenderOptions& render_options, const LossTerms& terms,
                         const LossWeights& weights, SceneGrad* grad = nullptr,
                         BranchTrace* branch = nullptr);

class Adam {
 public:
  Adam(const ParamVector& shape, const LearningRates& lr, double beta1 = 0.9,
       double beta2 = 0.999, double eps = 1e-15);
  /// Updates the active groups in place.
  void step(ParamVector& params, const ParamVector& grad, const GroupMask& active);

 private:
  LearningRates lr_;
  double beta1_, beta2_, eps_;
  ParamVector m_, v_;
  std::array<int, kGroupCount> steps_{};
};

struct TrainResult {
  Scene scene;
  std::vector<LossReport> history;
};

/// Called after every optimizer step with the report and the updated scene.
using TrainCallback = std::function<void(const LossReport&, const Scene&)>;

TrainResult train(const Scene& initial, std::span<const View> views, const TrainConfig& config,
                  const TrainCallback& callback = {});

struct GradCheckOptions {
  double step = 1e-4;
  double tolerance = 1e-3;
  int per_group = 8;  // coordinates compared per active group
  int max_attempts = 64;
  std::uint64_t seed = 1;
  GroupMask active = kAllActive;
  LossTerms terms{true, true, true, true};
  LossWeights weights;
  RenderOptions render;
  bool use_visibility = true;
  double alpha_min = kDefaultAlphaMin;
  /// Scales the analytic gradient of one group; a negative control.
  std::optional<ParamGroup> corrupt;
};

struct GroupCheck {
  ParamGroup group;
  bool frozen = false;
  int checked = 0;
  int skipped = 0;  // coordinates whose perturbation crossed a branch
  double max_rel_error = 0.0;
  double max_abs_analytic = 0.0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GroupCheck> groups;  // one entry per group, in kAllGroups order
  bool passed = true;
};

/// Central differences on physical parameters against the analytic
/// gradient. Coordinates whose +h and -h evaluations take different
/// discrete branches than the base point are skipped and replaced.
GradCheckReport grad_check(const Scene& scene, const View& view, const GradCheckOptions& options);

}  // namespace glosskit
