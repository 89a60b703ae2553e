// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "glosskit/params.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace glosskit {

namespace {

constexpr double kProbEps = 1e-6;
constexpr double kRadianceFloor = 1e-8;
constexpr double kScaleFloor = 1e-12;

constexpr std::array<std::string_view, kGroupCount> kNames = {
    "position", "tangents",   "scales",      "opacity",    "roughness",
    "specular", "diffuse_sh", "indirect_sh", "environment"};

}  // namespace

std::string_view group_name(ParamGroup g) { return kNames[index_of(g)]; }

ParamGroup group_from_name(std::string_view name) {
  for (int i = 0; i < kGroupCount; ++i)
    if (kNames[i] == name) return kAllGroups[i];
  throw Error("unknown parameter group '" + std::string(name) + "'");
}

int group_width(ParamGroup g) {
  switch (g) {
    case ParamGroup::Position: return 3;
    case ParamGroup::Tangents: return 6;
    case ParamGroup::Scales: return 2;
    case ParamGroup::Opacity: return 1;
    case ParamGroup::Roughness: return 1;
    case ParamGroup::Specular: return 3;
    case ParamGroup::DiffuseSh: return 3 * kDiffuseShCoeffs;
    case ParamGroup::IndirectSh: return 3 * kIndirectShCoeffs;
    case ParamGroup::Environment: return 3 * EnvironmentMap::kTexels;
  }
  return 0;
}

bool is_geometry(ParamGroup g) {
  return g == ParamGroup::Position || g == ParamGroup::Tangents || g == ParamGroup::Scales ||
         g == ParamGroup::Opacity;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) {
  p = std::clamp(p, kProbEps, 1.0 - kProbEps);
  return std::log(p / (1.0 - p));
}

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

double softplus_inverse(double y) {
  y = std::max(y, kRadianceFloor);
  return y > 30.0 ? y : y + std::log(-std::expm1(-y));
}

std::size_t physical_count(const Scene& scene, ParamGroup g) {
  if (g == ParamGroup::Environment) return group_width(g);
  return scene.surfels.size() * group_width(g);
}

double get_physical(const Scene& scene, ParamGroup g, std::size_t index) {
  if (g == ParamGroup::Environment) return scene.environment.texels()[index / 3][index % 3];
  const int w = group_width(g);
  const Surfel& s = scene.surfels.at(index / w);
  const int k = static_cast<int>(index % w);
  switch (g) {
    case ParamGroup::Position: return s.position[k];
    case ParamGroup::Tangents: return k < 3 ? s.tangent_u[k] : s.tangent_v[k - 3];
    case ParamGroup::Scales: return k == 0 ? s.scale_u : s.scale_v;
    case ParamGroup::Opacity: return s.opacity;
    case ParamGroup::Roughness: return s.roughness;
    case ParamGroup::Specular: return s.specular_reflectance[k];
    case ParamGroup::DiffuseSh: return s.diffuse_sh[k / 3][k % 3];
    case ParamGroup::IndirectSh: return s.indirect_sh[k / 3][k % 3];
    case ParamGroup::Environment: break;
  }
  return 0.0;
}

void set_physical(Scene& scene, ParamGroup g, std::size_t index, double value) {
  if (g == ParamGroup::Environment) {
    scene.environment.texels()[index / 3][index % 3] = value;
    return;
  }
  const int w = group_width(g);
  Surfel& s = scene.surfels.at(index / w);
  const int k = static_cast<int>(index % w);
  switch (g) {
    case ParamGroup::Position: s.position[k] = value; break;
    case ParamGroup::Tangents: (k < 3 ? s.tangent_u[k] : s.tangent_v[k - 3]) = value; break;
    case ParamGroup::Scales: (k == 0 ? s.scale_u : s.scale_v) = value; break;
    case ParamGroup::Opacity: s.opacity = value; break;
    case ParamGroup::Roughness: s.roughness = value; break;
    case ParamGroup::Specular: s.specular_reflectance[k] = value; break;
    case ParamGroup::DiffuseSh: s.diffuse_sh[k / 3][k % 3] = value; break;
    case ParamGroup::IndirectSh: s.indirect_sh[k / 3][k % 3] = value; break;
    case ParamGroup::Environment: break;
  }
}

ParamVector encode(const Scene& scene) {
  ParamVector p;
  for (ParamGroup g : kAllGroups) {
    const std::size_t n = physical_count(scene, g);
    std::vector<double>& out = p[g];
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = get_physical(scene, g, i);
      switch (g) {
        case ParamGroup::Scales: out[i] = std::log(v); break;
        case ParamGroup::Opacity:
        case ParamGroup::Roughness:
        case ParamGroup::Specular: out[i] = logit(v); break;
        case ParamGroup::Environment: out[i] = softplus_inverse(v); break;
        default: out[i] = v;
      }
    }
  }
  return p;
}

void decode(const ParamVector& p, const GroupMask& mask, Scene& scene) {
  for (ParamGroup g : kAllGroups) {
    if (!mask[index_of(g)]) continue;
    const std::vector<double>& in = p[g];
    for (std::size_t i = 0; i < in.size(); ++i) {
      double v = in[i];
      switch (g) {
        case ParamGroup::Scales: v = std::max(std::exp(v), kScaleFloor); break;
        case ParamGroup::Opacity:
        case ParamGroup::Specular: v = sigmoid(v); break;
        case ParamGroup::Roughness: v = std::max(sigmoid(v), kProbEps); break;
        case ParamGroup::Environment: v = softplus(v); break;
        default: break;
      }
      set_physical(scene, g, i, v);
    }
  }
  if (mask[index_of(ParamGroup::Tangents)])
    for (Surfel& s : scene.surfels) orthonormalize_tangents(s);
}

std::vector<double> physical_gradient(const SceneGrad& grad, ParamGroup g) {
  std::vector<double> out;
  if (g == ParamGroup::Environment) {
    out.reserve(3 * grad.environment.size());
    for (const Rgb& c : grad.environment)
      for (int k = 0; k < 3; ++k) out.push_back(c[k]);
    return out;
  }
  out.reserve(grad.surfels.size() * group_width(g));
  for (const SurfelGrad& s : grad.surfels) {
    switch (g) {
      case ParamGroup::Position:
        for (int k = 0; k < 3; ++k) out.push_back(s.position[k]);
        break;
      case ParamGroup::Tangents:
        for (int k = 0; k < 3; ++k) out.push_back(s.tangent_u[k]);
        for (int k = 0; k < 3; ++k) out.push_back(s.tangent_v[k]);
        break;
      case ParamGroup::Scales:
        out.push_back(s.scale_u);
        out.push_back(s.scale_v);
        break;
      case ParamGroup::Opacity: out.push_back(s.opacity); break;
      case ParamGroup::Roughness: out.push_back(s.roughness); break;
      case ParamGroup::Specular:
        for (int k = 0; k < 3; ++k) out.push_back(s.specular_reflectance[k]);
        break;
      case ParamGroup::DiffuseSh:
        for (const Rgb& c : s.diffuse_sh)
          for (int k = 0; k < 3; ++k) out.push_back(c[k]);
        break;
      case ParamGroup::IndirectSh:
        for (const Rgb& c : s.indirect_sh)
          for (int k = 0; k < 3; ++k) out.push_back(c[k]);
        break;
      case ParamGroup::Environment: break;
    }
  }
  return out;
}

ParamVector raw_gradient(const ParamVector& p, const SceneGrad& grad, const GroupMask& mask) {
  ParamVector out;
  for (ParamGroup g : kAllGroups) {
    std::vector<double>& dst = out[g];
    const std::vector<double>& x = p[g];
    if (!mask[index_of(g)]) {
      dst.assign(x.size(), 0.0);
      continue;
    }
    dst = physical_gradient(grad, g);
    if (dst.size() != x.size()) throw Error("raw_gradient: gradient does not match the scene");
    for (std::size_t i = 0; i < dst.size(); ++i) {
      switch (g) {
        case ParamGroup::Scales: dst[i] *= std::exp(x[i]); break;
        case ParamGroup::Opacity:
        case ParamGroup::Roughness:
        case ParamGroup::Specular: {
          const double s = sigmoid(x[i]);
          dst[i] *= s * (1.0 - s);
          break;
        }
        case ParamGroup::Environment: dst[i] *= sigmoid(x[i]); break;
        default: break;
      }
    }
  }
  return out;
}

}  // namespace glosskit
