// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "glosskit/brdf.hpp"
#include "glosskit/io.hpp"
#include "glosskit/sh.hpp"
#include "glosskit/synthetic.hpp"

namespace gk = glosskit;
using gk::kPi;
using gk::Rgb;
using gk::Vec3;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Golden-spiral points on the unit sphere, weight 4 pi / n each.
std::vector<Vec3> sphere_points(int n) {
  std::vector<Vec3> out;
  out.reserve(n);
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double r = std::sqrt(1.0 - z * z);
    out.emplace_back(r * std::cos(golden * i), r * std::sin(golden * i), z);
  }
  return out;
}

// ------------------------------------------------------------ criterion 1

Outcome sg_quadrature() {
  const auto pts = sphere_points(400000);
  Outcome o{true, ""};
  gk::SgParams p;
  p.lobe_axis = Vec3(0.3, -0.5, 0.8).normalized();
  p.amplitude = 1.7;
  for (double lambda : {1.0, 10.0, 100.0}) {
    p.sharpness = lambda;
    double sum = 0.0;
    for (const Vec3& d : pts) sum += gk::eval_sg(d, p);
    sum *= 4.0 * kPi / pts.size();
    const double exact = 2.0 * kPi * p.amplitude * (1.0 - std::exp(-2.0 * lambda)) / lambda;
    const double rel = std::abs(sum - exact) / exact;
    o.pass = o.pass && rel <= 0.01;
    o.detail += fmt("lambda=%g rel=%.2e ", lambda, rel);
  }
  return o;
}

// ------------------------------------------------------------ criterion 2

Outcome asg_identity() {
  gk::Rng rng(2);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    gk::AsgParams p;
    const Vec3 z = rng.unit_vector();
    const Vec3 x = z.unitOrthogonal();
    p.frame_z = z;
    p.frame_x = x;
    p.frame_y = z.cross(x);
    p.amplitude = rng.uniform(0.1, 5.0);
    p.sharp_x = p.sharp_y = rng.uniform(0.1, 50.0);
    const Vec3 v = rng.unit_vector();
    const double vz = v.dot(z);
    const double expected = p.amplitude * std::max(vz, 0.0) * std::exp(-p.sharp_x * (1.0 - vz * vz));
    worst = std::max(worst, std::abs(gk::eval_asg(v, p) - expected));
  }
  return {worst <= 1e-12, fmt("max abs diff %.2e over 1000 directions", worst)};
}

// ------------------------------------------------------------ criterion 3

Outcome ndf_normalization() {
  const Vec3 n = Vec3(0.2, -0.4, 0.8).normalized();
  const auto pts = sphere_points(400000);
  double sum = 0.0;
  for (const Vec3& h : pts)
    if (h.dot(n) > 0.0) sum += gk::ndf_iso(h, n, 0.1) * h.dot(n);
  sum *= 4.0 * kPi / pts.size();
  return {sum >= 0.95 && sum <= 1.05, fmt("integral %.4f at r=0.1", sum)};
}

// ------------------------------------------------------------ criterion 4

Outcome shading_oracle() {
  Outcome o{true, ""};
  const gk::EnvironmentMap env(Rgb::Constant(1.0));
  for (double r : {0.1, 0.3, 0.7}) {
    gk::Surfel s;
    s.roughness = r;
    s.specular_reflectance = Rgb(0.04, 0.3, 0.9);
    const Vec3 n = gk::normal_of(s);
    const Vec3 wo = n;
    const Rgb cs = gk::shade(s, wo, env, {}, gk::ShadingOptions{}) -
                   gk::eval_sh(s.diffuse_sh, wo).max(0.0);
    // Uniform hemisphere Monte Carlo of the reflection integral.
    gk::Rng rng(1000 + static_cast<int>(r * 10));
    Rgb mc = Rgb::Zero();
    const int samples = 1000000;
    for (int i = 0; i < samples; ++i) {
      Vec3 wi = rng.unit_vector();
      if (wi.dot(n) < 0.0) wi = -wi;
      mc += gk::specular_brdf(wo, wi, n, r, s.specular_reflectance) * wi.dot(n);
    }
    mc *= 2.0 * kPi / samples;
    const double rel = ((cs - mc) / mc).abs().maxCoeff();
    o.pass = o.pass && rel <= 0.03;
    o.detail += fmt("r=%.1f rel=%.2e ", r, rel);
  }
  return o;
}

// ------------------------------------------------------------ criterion 5

Outcome gradient_suite() {
  gk::Scene scene;
  gk::SphereOptions so;
  so.count = 50;
  so.roughness = 0.3;
  scene.surfels = gk::make_sphere(so);
  scene.environment = gk::make_sky(5);
  const gk::Camera cam =
      gk::Camera::look_at(Vec3(2.4, -2.0, 1.2), Vec3::Zero(), Vec3(0, 0, 1), 0.8, 64, 64);

  gk::Scene target = scene;
  gk::perturb_appearance(target, 6);
  for (gk::Surfel& s : target.surfels) s.position += Vec3(0.013, -0.007, 0.011);
  gk::GradCheckOptions opt;
  opt.render.shading.samples = 16;
  const auto views = gk::render_views(target, {cam}, opt.render, opt.alpha_min);
  const gk::GradCheckReport r = gk::grad_check(scene, views.front(), opt);
  Outcome o{r.passed, ""};
  double worst = 0.0;
  int checked = 0;
  for (const gk::GroupCheck& g : r.groups) {
    worst = std::max(worst, g.max_rel_error);
    checked += g.checked;
    if (!g.passed) o.detail += std::string(gk::group_name(g.group)) + " failed; ";
  }
  o.detail += fmt("%d groups, %d coordinates, max rel err %.2e", static_cast<int>(r.groups.size()),
                  checked, worst);
  return o;
}

// ------------------------------------------------------------ criterion 6

double brute_transmittance(const gk::Ray& ray, std::span<const gk::Surfel> surfels,
                           double alpha_min) {
  double t = 1.0;
  for (const gk::Surfel& s : surfels) {
    const Vec3 n = s.tangent_u.cross(s.tangent_v);
    const double denom = ray.direction.dot(n);
    if (std::abs(denom) < 1e-9) continue;
    const double th = (s.position - ray.origin).dot(n) / denom;
    if (!(th > 0.0)) continue;
    const Vec3 q = ray.at(th) - s.position;
    const double u = q.dot(s.tangent_u) / s.scale_u;
    const double v = q.dot(s.tangent_v) / s.scale_v;
    const double alpha = s.opacity * std::exp(-0.5 * (u * u + v * v));
    if (alpha >= alpha_min) t *= 1.0 - alpha;
  }
  return t;
}

Outcome bvh_exactness() {
  const auto surfels = gk::make_random_surfels(500, 61, 2.0, 0.05, 0.4);
  const auto rays = gk::make_random_rays(100, 62, 2.0);
  const gk::SurfelBvh bvh = gk::SurfelBvh::build(surfels, 0.01);
  double worst = 0.0;
  for (const gk::Ray& ray : rays)
    worst = std::max(worst, std::abs(gk::transmittance(ray, bvh, surfels, gk::kInfinity) -
                                     brute_transmittance(ray, surfels, 0.01)));

  gk::Rng rng(63);
  int configs = 0, outside = 0;
  for (double alpha_min : {0.01, 0.05, 0.2}) {
    for (int k = 0; k < 4; ++k) {
      gk::Surfel s = gk::make_random_surfels(1, 64 + k, 1.0, 0.05, 0.5).front();
      s.opacity = rng.uniform(alpha_min * 1.5, 1.0);
      const auto hull = gk::proxy_hull(s, alpha_min);
      if (!hull) return {false, "no hull for an opaque surfel"};
      const double radius = gk::proxy_stretch(s.opacity, alpha_min);
      int tested = 0;
      while (tested < 10000) {
        const double rad = radius * std::sqrt(rng.uniform());
        const double ang = rng.uniform(0, 2 * kPi);
        const double u = rad * std::cos(ang), v = rad * std::sin(ang);
        if (s.opacity * gk::eval_kernel(u, v) < alpha_min) continue;
        const Vec3 p = s.position + u * s.scale_u * s.tangent_u + v * s.scale_v * s.tangent_v;
        if (!hull->contains(p)) ++outside;
        ++tested;
      }
      ++configs;
    }
  }
  return {worst <= 1e-6 && outside == 0,
          fmt("max |bvh - brute| %.2e on 100x500; %d of %d coverage points outside", worst,
              outside, configs * 10000)};
}

// ------------------------------------------------------------ criterion 7

Outcome proxy_benefit() {
  const auto surfels = gk::make_grazing_surfels(400, 71);
  const auto rays = gk::make_grazing_rays(2000, 72);
  const gk::ProxyBenchResult r = gk::bench_proxy(surfels, rays, 0.01);
  return {r.candidate_hits_proxy < r.candidate_hits_aabb,
          fmt("hull candidates %ld vs aabb %ld (ratio %.3f)", r.candidate_hits_proxy,
              r.candidate_hits_aabb, r.ratio)};
}

// --------------------------------------------------------- criteria 8, 9

struct FitSetup {
  gk::Scene truth;
  gk::Scene initial;
  std::vector<gk::View> views;
};

FitSetup make_fit_setup() {
  FitSetup f;
  gk::SphereOptions so;  // 200 surfels, r = 0.1
  f.truth.surfels = gk::make_sphere(so);
  f.truth.environment = gk::make_sky(3);
  const auto cams = gk::make_orbit(16, Vec3::Zero(), 3.5, 0.35, 0.7, 32, 32);
  f.views = gk::render_views(f.truth, cams, gk::RenderOptions{}, gk::kDefaultAlphaMin);
  f.initial = f.truth;
  gk::perturb_appearance(f.initial, 7);
  return f;
}

gk::TrainConfig fit_config() {
  gk::TrainConfig c;
  c.iters_scale = 0.05;
  c.lr.for_group(gk::ParamGroup::Roughness) = 2.5e-2;
  return c;
}

struct FitResult {
  double psnr = 0.0;
  double mean_roughness = 0.0;
  double seconds = 0.0;
};

FitResult run_fit(const FitSetup& f, const gk::TrainConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  const gk::TrainResult r = gk::train(f.initial, f.views, config);
  FitResult out;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  gk::RenderOptions ro;
  ro.shading.samples = config.samples;
  ro.shading.ndf = config.ndf;
  const auto vis = gk::precompute_visibility(r.scene.surfels, config.alpha_min, config.samples);
  for (const gk::View& v : f.views)
    out.psnr += gk::psnr(gk::render(r.scene, v.camera, vis, ro).color, v.image.rgb);
  out.psnr /= f.views.size();
  for (const gk::Surfel& s : r.scene.surfels) out.mean_roughness += s.roughness;
  out.mean_roughness /= r.scene.surfels.size();
  return out;
}

// ----------------------------------------------------------- criterion 10

Outcome regularizers() {
  gk::Scene plane;
  plane.surfels = gk::make_plane(12, 0.15);
  const gk::Camera cam =
      gk::Camera::look_at(Vec3(0.2, -0.3, 2.0), Vec3::Zero(), Vec3(0, 1, 0), 0.7, 48, 48);
  gk::RenderOptions ro;
  ro.shading.diffuse_only = true;
  const gk::RenderBuffers b = gk::render(plane, cam, {}, ro);
  const double nl = gk::normal_loss(b, cam);

  const double gray = gk::light_reg(gk::EnvironmentMap(Rgb::Constant(0.6)));
  gk::EnvironmentMap red;
  red.at(5, 9) = Rgb(1, 0, 0);
  const double expected = (2.0 / 3.0 + 2.0 * (1.0 / 3.0)) / gk::EnvironmentMap::kTexels;
  const double red_err = std::abs(gk::light_reg(red) - expected);
  return {nl <= 1e-9 && gray == 0.0 && red_err <= 1e-12,
          fmt("planar normal loss %.2e; gray light reg %.1e; red texel error %.1e", nl, gray,
              red_err)};
}

// ----------------------------------------------------------- criterion 11

std::string slurp(const gk::fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism(const std::string& cli, const gk::fs::path& work) {
  const gk::fs::path dir = work / "determinism";
  gk::fs::remove_all(dir);
  gk::fs::create_directories(dir);

  gk::SceneFile file;
  gk::SphereOptions so;
  so.count = 60;
  file.scene.surfels = gk::make_sphere(so);
  file.scene.environment = gk::make_sky(11);
  const auto cams = gk::make_orbit(3, Vec3::Zero(), 3.5, 0.3, 0.8, 24, 24);
  for (std::size_t i = 0; i < cams.size(); ++i)
    file.cameras.push_back({"cam" + std::to_string(i), cams[i]});
  gk::write_scene(dir / "scene.json", file);
  gk::RenderOptions ro;
  ro.shading.samples = 16;
  gk::write_manifest(dir / "data" / "transforms.json",
                     gk::render_views(file.scene, cams, ro, gk::kDefaultAlphaMin));

  const std::string q = "'" + cli + "' ";
  const std::string quiet = " > /dev/null 2>&1";
  const std::string train = q + "train '" + (dir / "data" / "transforms.json").string() +
                            "' --ns 16 --init-sphere 60 --iters-scale 0.005 --seed 17 -o '";
  if (shell(train + (dir / "a").string() + "'" + quiet) != 0 ||
      shell(train + (dir / "b").string() + "'" + quiet) != 0)
    return {false, "train command failed"};
  const std::string csv_a = slurp(dir / "a" / "loss.csv");
  const bool csv_same = !csv_a.empty() && csv_a == slurp(dir / "b" / "loss.csv");

  const std::string render = q + "render '" + (dir / "scene.json").string() + "' --camera cam1 -o '";
  for (const char* t : {"1", "8"}) {
    const std::string base = (dir / (std::string("t") + t)).string();
    if (shell(render + base + ".png' --color-pfm '" + base + ".pfm' --depth '" + base +
              "_d.pfm' --threads " + t + quiet) != 0)
      return {false, "render command failed"};
  }
  const bool render_same = slurp(dir / "t1.png") == slurp(dir / "t8.png") &&
                           slurp(dir / "t1.pfm") == slurp(dir / "t8.pfm") &&
                           slurp(dir / "t1_d.pfm") == slurp(dir / "t8_d.pfm");
  const std::size_t rows = std::count(csv_a.begin(), csv_a.end(), '\n');
  return {csv_same && render_same,
          fmt("loss CSVs %s (%zu lines); threads 1 vs 8 renders %s", csv_same ? "identical" : "differ",
              rows, render_same ? "bit-identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string cli;
  std::string workdir = "acceptance_work";
  std::vector<int> only;
  app.add_option("--cli", cli, "Path to the glosskit executable")->required();
  app.add_option("--workdir", workdir, "Scratch directory");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);
  gk::fs::create_directories(workdir);

  const std::set<int> selected(only.begin(), only.end());
  auto wanted = [&](int id) { return selected.empty() || selected.count(id) > 0; };
  bool all = true;
  auto report = [&](int id, const char* name, double limit_s, const std::function<Outcome()>& f) {
    if (!wanted(id)) return;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = limit_s <= 0.0 || s <= limit_s;
    const bool pass = o.pass && in_time;
    all = all && pass;
    std::string limit = limit_s > 0.0 ? fmt(" (limit %.0f s)", limit_s) : "";
    std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << name << " | "
              << o.detail << " | " << fmt("%.2f s", s) << limit << (in_time ? "" : " TOO SLOW")
              << std::endl;
  };

  report(1, "SG quadrature", 1.0, sg_quadrature);
  report(2, "ASG identity", 0.0, asg_identity);
  report(3, "NDF normalization", 1.0, ndf_normalization);
  report(4, "shading vs Monte Carlo", 30.0, shading_oracle);
  report(5, "gradient suite", 120.0, gradient_suite);
  report(6, "BVH exactness and proxy coverage", 10.0, bvh_exactness);
  report(7, "proxy benefit", 0.0, proxy_benefit);

  if (wanted(8) || wanted(9)) {
    const FitSetup setup = make_fit_setup();
    FitResult full;
    report(8, "desk-scale fit", 900.0, [&] {
      full = run_fit(setup, fit_config());
      return Outcome{full.psnr >= 30.0 && std::abs(full.mean_roughness - 0.1) <= 0.1,
                     fmt("PSNR %.2f dB, mean roughness %.4f (truth 0.1), train %.0f s", full.psnr,
                         full.mean_roughness, full.seconds)};
    });
    report(9, "ablation ordering", 0.0, [&] {
      if (full.psnr == 0.0) full = run_fit(setup, fit_config());
      gk::TrainConfig iso = fit_config();
      iso.ndf = gk::NdfModel::IsotropicSg;
      gk::TrainConfig no_normal = fit_config();
      no_normal.normal_loss = false;
      const FitResult a = run_fit(setup, iso);
      const FitResult b = run_fit(setup, no_normal);
      return Outcome{a.psnr <= full.psnr && b.psnr <= full.psnr,
                     fmt("full %.2f dB, iso-sg %.2f dB, no-normal-loss %.2f dB", full.psnr, a.psnr,
                         b.psnr)};
    });
  }

  report(10, "regularizers", 0.0, regularizers);
  report(11, "determinism", 0.0, [&] { return determinism(cli, workdir); });

  std::cout << (all ? "acceptance: all selected criteria PASS" : "acceptance: FAIL") << std::endl;
  return all ? 0 : 1;
}
