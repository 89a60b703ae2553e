// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

// glosskit: render, train, relight, bench and gradcheck surfel scenes.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "glosskit/io.hpp"
#include "glosskit/optimize.hpp"
#include "glosskit/synthetic.hpp"

namespace gk = glosskit;

namespace {

constexpr int kExitError = 1;
constexpr int kExitCheckFailed = 3;
constexpr int kGradcheckMaxSurfels = 50;
constexpr int kGradcheckMaxSide = 64;

struct SharedFlags {
  int threads = 1;
  std::uint64_t seed = 0;
  double iters_scale = 1.0;
  double alpha_min = gk::kDefaultAlphaMin;
  int samples = 64;
  bool iso_sg = false;
  bool no_normal_loss = false;
  bool no_phases = false;
};

void add_shared(CLI::App* app, SharedFlags& f) {
  app->add_option("--threads", f.threads, "Worker threads")->check(CLI::PositiveNumber);
  app->add_option("--seed", f.seed, "Random seed");
  app->add_option("--iters-scale", f.iters_scale, "Multiplier on every stage length")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--alpha-min", f.alpha_min, "Opacity threshold for ray-traced visibility")
      ->check(CLI::Range(1e-6, 0.999));
  app->add_option("--ns", f.samples, "Incident directions per surfel")->check(CLI::PositiveNumber);
  app->add_flag("--iso-sg", f.iso_sg, "Isotropic SG NDF instead of the warped ASG");
  app->add_flag("--no-normal-loss", f.no_normal_loss, "Disable the normal consistency loss");
  app->add_flag("--no-phases", f.no_phases, "Train every group jointly in one stage");
}

struct RenderFlags {
  bool diffuse_only = false;
  bool no_visibility = false;
};

void add_render_flags(CLI::App* app, RenderFlags& f) {
  app->add_flag("--diffuse-only", f.diffuse_only, "Skip the specular term");
  app->add_flag("--no-visibility", f.no_visibility, "Treat every incident direction as unoccluded");
}

gk::RenderOptions render_options(const SharedFlags& s, const RenderFlags& r) {
  gk::RenderOptions o;
  o.threads = s.threads;
  o.shading.samples = s.samples;
  o.shading.ndf = s.iso_sg ? gk::NdfModel::IsotropicSg : gk::NdfModel::WarpedAsg;
  o.shading.diffuse_only = r.diffuse_only;
  o.use_visibility = !r.no_visibility;
  return o;
}

void init_logging() {
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("GLOSSKIT_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to "off"; only accept it when asked for.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
  }
}


gk::Camera pick_camera(const gk::SceneFile& file, const std::string& id) {
  if (file.cameras.empty()) throw gk::Error("scene has no cameras");
  if (id.empty()) return file.cameras.front().camera;
  return file.camera(id);
}

gk::VisibilityTable visibility_for(const gk::Scene& scene, const gk::RenderOptions& o,
                                   double alpha_min) {
  if (!o.use_visibility || o.shading.diffuse_only) return {};
  return gk::precompute_visibility(scene.surfels, alpha_min, o.shading.samples);
}

void write_outputs(const gk::RenderBuffers& b, const std::string& color,
                   const std::string& color_pfm, const std::string& depth,
                   const std::string& normal, const std::string& opacity) {
  gk::Image img(b.width, b.height);
  img.rgb = b.color;
  gk::write_png(color, img);
  if (!color_pfm.empty()) gk::write_pfm(color_pfm, b.width, b.height, b.color);
  if (!depth.empty()) gk::write_pfm(depth, b.width, b.height, b.depth);
  if (!opacity.empty()) gk::write_pfm(opacity, b.width, b.height, b.opacity);
  if (!normal.empty()) {
    std::vector<gk::Rgb> n(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) n[i] = b.normal[i].array();
    gk::write_pfm(normal, b.width, b.height, n);
  }
}

// ------------------------------------------------------------------ render

struct RenderArgs {
  std::string scene, camera, out = "render.png", color_pfm, depth, normal, opacity;
};

int cmd_render(const RenderArgs& a, const SharedFlags& s, const RenderFlags& r) {
  const gk::SceneFile file = gk::read_scene(a.scene);
  const gk::Camera cam = pick_camera(file, a.camera);
  const gk::RenderOptions o = render_options(s, r);
  const gk::RenderBuffers b = gk::render(file.scene, cam, visibility_for(file.scene, o, s.alpha_min), o);
  write_outputs(b, a.out, a.color_pfm, a.depth, a.normal, a.opacity);
  spdlog::info("wrote {}", a.out);
  return 0;
}

// ----------------------------------------------------------------- relight

struct RelightArgs {
  std::string scene, env, camera, out = "relit.png", color_pfm;
};

int cmd_relight(const RelightArgs& a, const SharedFlags& s, const RenderFlags& r) {
  gk::SceneFile file = gk::read_scene(a.scene);
  file.scene.environment = gk::read_environment(a.env);
  const gk::Camera cam = pick_camera(file, a.camera);
  const gk::RenderOptions o = render_options(s, r);
  const gk::RenderBuffers b = gk::render(file.scene, cam, visibility_for(file.scene, o, s.alpha_min), o);
  write_outputs(b, a.out, a.color_pfm, "", "", "");
  return 0;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  std::string manifest, config, out = "train_out", init;
  int init_sphere = 200;
  double init_radius = 1.0;
  int checkpoint_every = 0;
};

int cmd_train(const TrainArgs& a, const SharedFlags& s, CLI::App* app) {
  gk::TrainConfig cfg;
  if (!a.config.empty()) cfg = gk::read_config(a.config);
  auto given = [&](const char* flag) { return app->count(flag) > 0; };
  if (given("--threads")) cfg.threads = s.threads;
  if (given("--seed")) cfg.seed = s.seed;
  if (given("--iters-scale")) cfg.iters_scale = s.iters_scale;
  if (given("--alpha-min")) cfg.alpha_min = s.alpha_min;
  if (given("--ns")) cfg.samples = s.samples;
  if (s.iso_sg) cfg.ndf = gk::NdfModel::IsotropicSg;
  if (s.no_normal_loss) cfg.normal_loss = false;
  if (s.no_phases) cfg.phased = false;
  cfg.validate();

  const std::vector<gk::View> views = gk::read_manifest(a.manifest);
  gk::Scene init;
  if (!a.init.empty()) {
    init = gk::read_scene(a.init).scene;
  } else {
    gk::SphereOptions so;
    so.count = a.init_sphere;
    so.radius = a.init_radius;
    so.opacity = 0.5;
    so.roughness = 0.5;
    so.specular = gk::Rgb::Constant(0.04);
    so.tinted = false;
    so.indirect = 0.0;
    init.surfels = gk::make_sphere(so);
    for (gk::Surfel& surf : init.surfels) surf.diffuse_sh[0] = gk::Rgb::Constant(0.5 / 0.28209479177387814);
    init.environment = gk::EnvironmentMap(gk::Rgb::Constant(0.5));
  }

  const gk::fs::path out = a.out;
  gk::fs::create_directories(out);
  gk::SceneFile result_file;
  for (const gk::View& v : views) result_file.cameras.push_back({v.name, v.camera});

  const gk::fs::path ckpt_dir = out / "checkpoints";
  if (a.checkpoint_every > 0) gk::fs::create_directories(ckpt_dir);
  auto callback = [&](const gk::LossReport& r, const gk::Scene& scene) {
    if (a.checkpoint_every > 0 && (r.iteration + 1) % a.checkpoint_every == 0) {
      gk::SceneFile ck = result_file;
      ck.scene = scene;
      std::ostringstream name;
      name << "iter_" << std::setw(6) << std::setfill('0') << (r.iteration + 1) << ".json";
      gk::write_scene(ckpt_dir / name.str(), ck);
    }
  };
  const gk::TrainResult result = gk::train(init, views, cfg, callback);
  result_file.scene = result.scene;
  gk::write_scene(out / "scene.json", result_file);
  gk::write_loss_csv(out / "loss.csv", result.history);
  std::ofstream(out / "config.json") << gk::format_config(cfg);
  std::cout << "trained " << result.history.size() << " iterations; wrote " << (out / "scene.json").string()
            << "\n";
  return 0;
}

// ------------------------------------------------------------------- bench

struct BenchArgs {
  std::string scene, out = "bench.csv";
  int rays = 10000;
  bool grazing = false;
};

int cmd_bench(const BenchArgs& a, const SharedFlags& s) {
  const gk::SceneFile file = gk::read_scene(a.scene);
  std::vector<gk::Ray> rays;
  if (a.grazing) {
    rays = gk::make_grazing_rays(a.rays, s.seed);
  } else {
    gk::Aabb box;
    for (const gk::Surfel& surf : file.scene.surfels) box.extend(surf.position);
    const gk::Vec3 c = box.center();
    const double extent = std::max(0.5 * (box.hi - box.lo).maxCoeff(), 1e-3);
    rays = gk::make_random_rays(a.rays, s.seed, extent);
    for (gk::Ray& r : rays) r.origin += c;
  }
  const gk::ProxyBenchResult res = gk::bench_proxy(file.scene.surfels, rays, s.alpha_min);
  std::ofstream csv(a.out);
  if (!csv) throw gk::Error("cannot write '" + a.out + "'");
  csv << "rays,candidates_aabb,candidates_proxy,ratio,seconds_aabb,seconds_proxy\n"
      << std::setprecision(17) << rays.size() << ',' << res.candidate_hits_aabb << ','
      << res.candidate_hits_proxy << ',' << res.ratio << ',' << res.seconds_aabb << ','
      << res.seconds_proxy << '\n';
  std::cout << "candidates aabb=" << res.candidate_hits_aabb << " proxy=" << res.candidate_hits_proxy
            << " ratio=" << res.ratio << "\n";
  return 0;
}

// --------------------------------------------------------------- gradcheck

struct GradcheckArgs {
  std::string scene, camera, corrupt;
  int per_group = 8;
};

int cmd_gradcheck(const GradcheckArgs& a, const SharedFlags& s, const RenderFlags& r) {
  const gk::SceneFile file = gk::read_scene(a.scene);
  const gk::Camera cam = pick_camera(file, a.camera);
  if (static_cast<int>(file.scene.surfels.size()) > kGradcheckMaxSurfels ||
      cam.width > kGradcheckMaxSide || cam.height > kGradcheckMaxSide)
    throw gk::Error("gradcheck is limited to scenes of at most 50 surfels and 64x64 images (got " +
                    std::to_string(file.scene.surfels.size()) + " surfels, " +
                    std::to_string(cam.width) + "x" + std::to_string(cam.height) + ")");

  gk::GradCheckOptions opt;
  opt.render = render_options(s, r);
  opt.use_visibility = !r.no_visibility;
  opt.alpha_min = s.alpha_min;
  opt.per_group = a.per_group;
  opt.seed = s.seed + 1;
  opt.terms.normal = !s.no_normal_loss;
  if (!a.corrupt.empty()) opt.corrupt = gk::group_from_name(a.corrupt);

  // Target: the scene with scrambled appearance and slightly shifted
  // geometry, so no L1 residual sits at its kink.
  gk::Scene target_scene = file.scene;
  gk::perturb_appearance(target_scene, s.seed);
  for (gk::Surfel& surf : target_scene.surfels) {
    surf.position += gk::Vec3(0.013, -0.007, 0.011);
    surf.scale_u *= 1.05;
  }
  const auto views = gk::render_views(target_scene, {cam}, opt.render, s.alpha_min);
  const gk::GradCheckReport report = gk::grad_check(file.scene, views.front(), opt);

  std::cout << std::left << std::setw(13) << "group" << std::setw(9) << "checked" << std::setw(9)
            << "skipped" << std::setw(16) << "max_rel_error" << "result\n";
  for (const gk::GroupCheck& g : report.groups) {
    std::cout << std::setw(13) << gk::group_name(g.group) << std::setw(9) << g.checked
              << std::setw(9) << g.skipped << std::setw(16) << std::setprecision(3)
              << std::scientific << g.max_rel_error << std::defaultfloat
              << (g.frozen ? "FROZEN" : (g.passed ? "PASS" : "FAIL")) << "\n";
  }
  std::cout << (report.passed ? "gradcheck: PASS" : "gradcheck: FAIL") << "\n";
  return report.passed ? 0 : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  init_logging();
  CLI::App app{"Glossy surfel rendering and inverse rendering"};
  app.require_subcommand(1);
  SharedFlags shared;
  RenderFlags rflags;

  RenderArgs ra;
  auto* render = app.add_subcommand("render", "Render a scene to PNG (and optional PFM buffers)");
  render->add_option("scene", ra.scene, "Scene file")->required();
  render->add_option("--camera", ra.camera, "Camera id (default: first camera)");
  render->add_option("-o,--out", ra.out, "Color PNG");
  render->add_option("--color-pfm", ra.color_pfm, "Linear color PFM");
  render->add_option("--depth", ra.depth, "Depth PFM");
  render->add_option("--normal", ra.normal, "Normal PFM");
  render->add_option("--opacity", ra.opacity, "Opacity PFM");
  add_shared(render, shared);
  add_render_flags(render, rflags);

  TrainArgs ta;
  auto* trainc = app.add_subcommand("train", "Fit a scene to posed images");
  trainc->add_option("manifest", ta.manifest, "transforms JSON")->required();
  trainc->add_option("-c,--config", ta.config, "Training config JSON");
  trainc->add_option("-o,--out", ta.out, "Output directory");
  trainc->add_option("--init", ta.init, "Initial scene file (default: sphere primitive)");
  trainc->add_option("--init-sphere", ta.init_sphere, "Surfels on the initial sphere")
      ->check(CLI::PositiveNumber);
  trainc->add_option("--init-radius", ta.init_radius, "Radius of the initial sphere")
      ->check(CLI::PositiveNumber);
  trainc->add_option("--checkpoint-every", ta.checkpoint_every, "Scene checkpoint interval")
      ->check(CLI::NonNegativeNumber);
  add_shared(trainc, shared);

  RelightArgs la;
  auto* relight = app.add_subcommand("relight", "Render with a replacement environment map");
  relight->add_option("scene", la.scene, "Scene file")->required();
  relight->add_option("--env", la.env, "Environment map (.json or .pfm, 16x32)")->required();
  relight->add_option("--camera", la.camera, "Camera id (default: first camera)");
  relight->add_option("-o,--out", la.out, "Color PNG");
  relight->add_option("--color-pfm", la.color_pfm, "Linear color PFM");
  add_shared(relight, shared);
  add_render_flags(relight, rflags);

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Proxy hull vs AABB candidate counts");
  bench->add_option("scene", ba.scene, "Scene file")->required();
  bench->add_option("--rays", ba.rays, "Ray count")->check(CLI::PositiveNumber);
  bench->add_option("-o,--out", ba.out, "CSV output");
  bench->add_flag("--grazing", ba.grazing, "Shallow rays over the z = 0 plane");
  add_shared(bench, shared);

  GradcheckArgs ga;
  auto* gradcheck = app.add_subcommand("gradcheck", "Analytic vs finite-difference gradients");
  gradcheck->add_option("scene", ga.scene, "Scene file")->required();
  gradcheck->add_option("--camera", ga.camera, "Camera id (default: first camera)");
  gradcheck->add_option("--per-group", ga.per_group, "Coordinates per group")
      ->check(CLI::PositiveNumber);
  gradcheck->add_option("--corrupt", ga.corrupt, "Scale one group's analytic gradient (negative control)");
  add_shared(gradcheck, shared);
  add_render_flags(gradcheck, rflags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (render->parsed()) return cmd_render(ra, shared, rflags);
    if (trainc->parsed()) return cmd_train(ta, shared, trainc);
    if (relight->parsed()) return cmd_relight(la, shared, rflags);
    if (bench->parsed()) return cmd_bench(ba, shared);
    if (gradcheck->parsed()) return cmd_gradcheck(ga, shared, rflags);
  } catch (const std::exception& e) {
    std::cerr << "glosskit: error: " << e.what() << "\n";
    return kExitError;
  }
  return 0;
}
