// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "glosskit/camera.hpp"
#include "glosskit/common.hpp"
#include "glosskit/surfel.hpp"

namespace glosskit {

inline constexpr double kDefaultAlphaMin = 0.01;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Aabb {
  Vec3 lo = Vec3::Constant(kInfinity);
  Vec3 hi = Vec3::Constant(-kInfinity);

  void extend(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void extend(const Aabb& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  bool contains(const Vec3& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
  bool contains(const Aabb& b) const { return contains(b.lo) && contains(b.hi); }
  Vec3 center() const { return 0.5 * (lo + hi); }
  /// Slab test against [t_min, t_max].
  bool hit(const Ray& ray, double t_min, double t_max) const;
};

/// Anisotropically stretched icosahedron enclosing the part of a surfel
/// whose response reaches alpha_min.
struct ProxyHull {
  static constexpr int kVertices = 12;
  static constexpr int kFaces = 20;

  std::array<Vec3, kVertices> vertices;
  std::array<Vec3, kFaces> plane_normals;  // outward
  std::array<double, kFaces> plane_offsets;  // inside: n . x <= offset
  Aabb bounds;

  /// Vertex-index triples, shared by every hull.
  static const std::array<std::array<int, 3>, kFaces>& faces();
  /// Canonical vertices, scaled so the inscribed sphere has radius 1.
  static const std::array<Vec3, kVertices>& canonical_vertices();

  bool contains(const Vec3& p, double eps = 1e-9) const;
  /// Parametric interval [t_enter, t_exit] where the ray is inside the hull,
  /// clipped to [0, t_max]; nullopt when it never enters.
  std::optional<std::pair<double, double>> intersect(const Ray& ray, double t_max) const;
};

/// Stretch factor sqrt(2 ln(opacity / alpha_min)); zero or NaN when the
/// surfel never reaches alpha_min.
double proxy_stretch(double opacity, double alpha_min);

/// Thickness used along the normal: 1% of the smaller in-plane scale.
double proxy_thickness(const Surfel& s);

/// nullopt when opacity <= alpha_min (no point reaches the threshold).
std::optional<ProxyHull> proxy_hull(const Surfel& s, double alpha_min);

struct SurfelResponse {
  double t = 0.0;
  double response = 0.0;
};

/// Kernel response where the ray pierces the surfel plane.
std::optional<SurfelResponse> surfel_response(const Ray& ray, const Surfel& s);

enum class LeafTest { Hull, AabbOnly };

/// Binary BVH with one surfel per leaf, median split on the longest axis of
/// the centroid bounds.
class SurfelBvh {
 public:
  struct Node {
    Aabb box;
    int left = -1;
    int right = -1;
    int leaf = -1;  // index into leaves() for leaf nodes
  };
  struct Leaf {
    int surfel = -1;
    ProxyHull hull;
  };

  SurfelBvh() = default;
  static SurfelBvh build(std::span<const Surfel> surfels, double alpha_min);

  bool empty() const { return nodes_.empty(); }
  double alpha_min() const { return alpha_min_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Leaf>& leaves() const { return leaves_; }

  /// Calls visit(surfel_index) for every leaf whose box (and hull, in Hull
  /// mode) the ray meets within [0, t_max]. Leaves are visited in a fixed
  /// order for a given ray.
  template <class F>
  void traverse(const Ray& ray, double t_max, LeafTest test, F&& visit) const;

  /// Surfels whose leaf box contains the point.
  std::vector<int> point_query(const Vec3& p) const;

 private:
  int build_node(std::vector<int>& order, int begin, int end, std::span<const Vec3> centers);

  std::vector<Node> nodes_;
  std::vector<Leaf> leaves_;
  double alpha_min_ = kDefaultAlphaMin;
};

template <class F>
void SurfelBvh::traverse(const Ray& ray, double t_max, LeafTest test, F&& visit) const {
  if (nodes_.empty()) return;
  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!node.box.hit(ray, 0.0, t_max)) continue;
    if (node.leaf >= 0) {
      const Leaf& leaf = leaves_[node.leaf];
      if (test == LeafTest::Hull && !leaf.hull.intersect(ray, t_max)) continue;
      visit(leaf.surfel);
      continue;
    }
    stack[top++] = node.right;
    stack[top++] = node.left;
  }
}

/// Product of (1 - opacity * response) over surfels pierced at 0 < t < t_max
/// whose alpha reaches the BVH's alpha_min; `exclude` (or -1) is skipped.
double transmittance(const Ray& ray, const SurfelBvh& bvh, std::span<const Surfel> surfels,
                     double t_max, int exclude = -1, LeafTest test = LeafTest::Hull);

/// Per-surfel transmittance toward each of its hemisphere quadrature
/// directions. Row-major, surfels x samples.
struct VisibilityTable {
  int samples = 0;
  std::vector<double> values;

  bool empty() const { return values.empty(); }
  int surfel_count() const { return samples > 0 ? static_cast<int>(values.size()) / samples : 0; }
  std::span<const double> row(int surfel) const {
    if (empty()) return {};
    return std::span<const double>(values).subspan(static_cast<std::size_t>(surfel) * samples,
                                                   samples);
  }
};

/// Rays leave each surfel at position + eps * normal, eps = 1e-3 * min scale.
VisibilityTable precompute_visibility(std::span<const Surfel> surfels, double alpha_min,
                                      int samples);

struct ProxyBenchResult {
  long candidate_hits_proxy = 0;
  long candidate_hits_aabb = 0;
  double ratio = 1.0;
  double seconds_proxy = 0.0;
  double seconds_aabb = 0.0;
};

/// Counts leaf candidates with and without the hull test over a ray set.
ProxyBenchResult bench_proxy(std::span<const Surfel> surfels, std::span<const Ray> rays,
                             double alpha_min);

}  // namespace glosskit
