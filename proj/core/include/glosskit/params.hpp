// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "glosskit/render_grad.hpp"
#include "glosskit/scene.hpp"

namespace glosskit {

enum class ParamGroup {
  Position,
  Tangents,
  Scales,
  Opacity,
  Roughness,
  Specular,
  DiffuseSh,
  IndirectSh,
  Environment,
};

inline constexpr int kGroupCount = 9;
inline constexpr std::array<ParamGroup, kGroupCount> kAllGroups = {
    ParamGroup::Position,  ParamGroup::Tangents,  ParamGroup::Scales,
    ParamGroup::Opacity,   ParamGroup::Roughness, ParamGroup::Specular,
    ParamGroup::DiffuseSh, ParamGroup::IndirectSh, ParamGroup::Environment};

std::string_view group_name(ParamGroup g);
/// Inverse of group_name; throws on an unknown name.
ParamGroup group_from_name(std::string_view name);
/// Scalars per surfel (or in total, for the environment).
int group_width(ParamGroup g);
bool is_geometry(ParamGroup g);

using GroupMask = std::array<bool, kGroupCount>;
inline constexpr GroupMask kAllActive = {true, true, true, true, true, true, true, true, true};

inline int index_of(ParamGroup g) { return static_cast<int>(g); }

/// Unconstrained optimizer variables. Opacity, roughness and F0 go through a
/// logistic, scales through exp, environment radiance through softplus;
/// positions, tangents and SH coefficients are stored as is.
struct ParamVector {
  std::array<std::vector<double>, kGroupCount> values;

  std::vector<double>& operator[](ParamGroup g) { return values[index_of(g)]; }
  const std::vector<double>& operator[](ParamGroup g) const { return values[index_of(g)]; }
};

ParamVector encode(const Scene& scene);

/// Writes the groups selected by `mask` back into `scene`. Tangents are
/// re-orthonormalized after decoding.
void decode(const ParamVector& params, const GroupMask& mask, Scene& scene);

/// Chains physical gradients onto the unconstrained variables. Inactive
/// groups get exactly zero.
ParamVector raw_gradient(const ParamVector& params, const SceneGrad& grad, const GroupMask& mask);

/// Physical gradient for one group, surfel-major, in the same layout as the
/// encoded group (used for gradient checks on physical parameters).
std::vector<double> physical_gradient(const SceneGrad& grad, ParamGroup g);

/// Reads or writes one physical scalar of a group in the same layout.
double get_physical(const Scene& scene, ParamGroup g, std::size_t index);
void set_physical(Scene& scene, ParamGroup g, std::size_t index, double value);
std::size_t physical_count(const Scene& scene, ParamGroup g);

double sigmoid(double x);
double logit(double p);
double softplus(double x);
double softplus_inverse(double y);

}  // namespace glosskit
