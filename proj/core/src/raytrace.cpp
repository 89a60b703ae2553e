// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "glosskit/raytrace.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "glosskit/brdf.hpp"

namespace glosskit {

bool Aabb::hit(const Ray& ray, double t_min, double t_max) const {
  for (int a = 0; a < 3; ++a) {
    const double inv = 1.0 / ray.direction[a];
    double t0 = (lo[a] - ray.origin[a]) * inv;
    double t1 = (hi[a] - ray.origin[a]) * inv;
    if (inv < 0.0) std::swap(t0, t1);
    // NaN (origin on a slab plane with a zero direction) leaves bounds as is.
    if (t0 > t_min) t_min = t0;
    if (t1 < t_max) t_max = t1;
    if (t_max < t_min) return false;
  }
  return true;
}

namespace {

struct Icosahedron {
  std::array<Vec3, 12> vertices;
  std::array<std::array<int, 3>, 20> faces;
};

Icosahedron make_icosahedron() {
  const double phi = 0.5 * (1.0 + std::sqrt(5.0));
  Icosahedron ico;
  int i = 0;
  for (double a : {-1.0, 1.0})
    for (double b : {-phi, phi}) {
      ico.vertices[i++] = Vec3(0.0, a, b);
      ico.vertices[i++] = Vec3(a, b, 0.0);
      ico.vertices[i++] = Vec3(b, 0.0, a);
    }
  // Edge length is 2; the inradius is phi^2 / sqrt(3).
  const double inradius = phi * phi / std::sqrt(3.0);
  for (Vec3& v : ico.vertices) v /= inradius;
  const double edge2 = std::pow(2.0 / inradius, 2);
  int f = 0;
  for (int a = 0; a < 12; ++a)
    for (int b = a + 1; b < 12; ++b)
      for (int c = b + 1; c < 12; ++c) {
        auto adjacent = [&](int p, int q) {
          return std::abs((ico.vertices[p] - ico.vertices[q]).squaredNorm() - edge2) < 1e-9;
        };
        if (!adjacent(a, b) || !adjacent(b, c) || !adjacent(a, c)) continue;
        const Vec3 n = (ico.vertices[b] - ico.vertices[a]).cross(ico.vertices[c] - ico.vertices[a]);
        if (n.dot(ico.vertices[a]) > 0.0)
          ico.faces[f++] = {a, b, c};
        else
          ico.faces[f++] = {a, c, b};
      }
  return ico;
}

const Icosahedron& icosahedron() {
  static const Icosahedron ico = make_icosahedron();
  return ico;
}

}  // namespace

const std::array<std::array<int, 3>, ProxyHull::kFaces>& ProxyHull::faces() {
  return icosahedron().faces;
}

const std::array<Vec3, ProxyHull::kVertices>& ProxyHull::canonical_vertices() {
  return icosahedron().vertices;
}

bool ProxyHull::contains(const Vec3& p, double eps) const {
  for (int f = 0; f < kFaces; ++f)
    if (plane_normals[f].dot(p) > plane_offsets[f] + eps * (1.0 + std::abs(plane_offsets[f])))
      return false;
  return true;
}

std::optional<std::pair<double, double>> ProxyHull::intersect(const Ray& ray, double t_max) const {
  double t_enter = 0.0;
  double t_exit = t_max;
  for (int f = 0; f < kFaces; ++f) {
    const Vec3& n = plane_normals[f];
    const double slack = 1e-9 * (1.0 + std::abs(plane_offsets[f]));
    const double dist = plane_offsets[f] + slack - n.dot(ray.origin);
    const double denom = n.dot(ray.direction);
    if (denom == 0.0) {
      if (dist < 0.0) return std::nullopt;
      continue;
    }
    const double t = dist / denom;
    if (denom < 0.0)
      t_enter = std::max(t_enter, t);
    else
      t_exit = std::min(t_exit, t);
    if (t_enter > t_exit) return std::nullopt;
  }
  return std::make_pair(t_enter, t_exit);
}

double proxy_stretch(double opacity, double alpha_min) {
  return std::sqrt(2.0 * std::log(opacity / alpha_min));
}

double proxy_thickness(const Surfel& s) { return 0.01 * std::min(s.scale_u, s.scale_v); }

std::optional<ProxyHull> proxy_hull(const Surfel& s, double alpha_min) {
  if (!(alpha_min > 0.0 && alpha_min < 1.0))
    throw Error("proxy_hull: alpha_min must lie in (0, 1)");
  if (!(s.opacity > alpha_min)) return std::nullopt;
  const double k = proxy_stretch(s.opacity, alpha_min);
  const Vec3 n = normal_of(s);
  const Vec3 axis_u = k * s.scale_u * s.tangent_u;
  const Vec3 axis_v = k * s.scale_v * s.tangent_v;
  const Vec3 axis_n = k * proxy_thickness(s) * n;
  ProxyHull hull;
  const auto& canon = ProxyHull::canonical_vertices();
  for (int i = 0; i < ProxyHull::kVertices; ++i) {
    hull.vertices[i] = s.position + canon[i].x() * axis_u + canon[i].y() * axis_v +
                       canon[i].z() * axis_n;
    hull.bounds.extend(hull.vertices[i]);
  }
  const auto& faces = ProxyHull::faces();
  for (int f = 0; f < ProxyHull::kFaces; ++f) {
    const Vec3& a = hull.vertices[faces[f][0]];
    const Vec3& b = hull.vertices[faces[f][1]];
    const Vec3& c = hull.vertices[faces[f][2]];
    Vec3 pn = (b - a).cross(c - a).normalized();
    // A mirroring frame (left-handed tangents) flips the winding.
    if (pn.dot(a - s.position) < 0.0) pn = -pn;
    hull.plane_normals[f] = pn;
    hull.plane_offsets[f] = pn.dot(a);
  }
  return hull;
}

std::optional<SurfelResponse> surfel_response(const Ray& ray, const Surfel& s) {
  const auto hit = ray_plane_uv(ray, s);
  if (!hit) return std::nullopt;
  return SurfelResponse{hit->t, eval_kernel(hit->u, hit->v)};
}

SurfelBvh SurfelBvh::build(std::span<const Surfel> surfels, double alpha_min) {
  SurfelBvh bvh;
  bvh.alpha_min_ = alpha_min;
  std::vector<Vec3> centers;
  for (int i = 0; i < static_cast<int>(surfels.size()); ++i) {
    auto hull = proxy_hull(surfels[i], alpha_min);
    if (!hull) continue;
    centers.push_back(hull->bounds.center());
    bvh.leaves_.push_back(Leaf{i, std::move(*hull)});
  }
  if (bvh.leaves_.empty()) return bvh;
  std::vector<int> order(bvh.leaves_.size());
  std::iota(order.begin(), order.end(), 0);
  bvh.nodes_.reserve(2 * bvh.leaves_.size());
  bvh.build_node(order, 0, static_cast<int>(order.size()), centers);
  return bvh;
}

int SurfelBvh::build_node(std::vector<int>& order, int begin, int end,
                          std::span<const Vec3> centers) {
  const int index = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  if (end - begin == 1) {
    nodes_[index].leaf = order[begin];
    nodes_[index].box = leaves_[order[begin]].hull.bounds;
    return index;
  }
  Aabb centroid_box;
  for (int i = begin; i < end; ++i) centroid_box.extend(centers[order[i]]);
  int axis = 0;
  const Vec3 extent = centroid_box.hi - centroid_box.lo;
  if (extent.y() > extent[axis]) axis = 1;
  if (extent.z() > extent[axis]) axis = 2;
  const int mid = begin + (end - begin) / 2;
  std::sort(order.begin() + begin, order.begin() + end, [&](int a, int b) {
    if (centers[a][axis] != centers[b][axis]) return centers[a][axis] < centers[b][axis];
    return a < b;
  });
  const int left = build_node(order, begin, mid, centers);
  const int right = build_node(order, mid, end, centers);
  nodes_[index].left = left;
  nodes_[index].right = right;
  nodes_[index].box = nodes_[left].box;
  nodes_[index].box.extend(nodes_[right].box);
  return index;
}

std::vector<int> SurfelBvh::point_query(const Vec3& p) const {
  std::vector<int> found;
  if (nodes_.empty()) return found;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (!node.box.contains(p)) continue;
    if (node.leaf >= 0) {
      found.push_back(leaves_[node.leaf].surfel);
      continue;
    }
    stack.push_back(node.right);
    stack.push_back(node.left);
  }
  return found;
}

double transmittance(const Ray& ray, const SurfelBvh& bvh, std::span<const Surfel> surfels,
                     double t_max, int exclude, LeafTest test) {
  if (!(t_max > 0.0)) throw Error("transmittance: t_max must be positive");
  double t_product = 1.0;
  const double alpha_min = bvh.alpha_min();
  bvh.traverse(ray, t_max, test, [&](int i) {
    if (i == exclude) return;
    const auto r = surfel_response(ray, surfels[i]);
    if (!r || !(r->t > 0.0 && r->t < t_max)) return;
    const double alpha = surfels[i].opacity * r->response;
    if (alpha < alpha_min) return;
    t_product *= 1.0 - alpha;
  });
  return std::clamp(t_product, 0.0, 1.0);
}

VisibilityTable precompute_visibility(std::span<const Surfel> surfels, double alpha_min,
                                      int samples) {
  VisibilityTable table;
  table.samples = samples;
  table.values.assign(surfels.size() * static_cast<std::size_t>(samples), 1.0);
  const SurfelBvh bvh = SurfelBvh::build(surfels, alpha_min);
  if (bvh.empty()) return table;
  for (std::size_t i = 0; i < surfels.size(); ++i) {
    const Surfel& s = surfels[i];
    const Vec3 n = normal_of(s);
    const std::vector<Vec3> dirs = fibonacci_dirs(samples, n);
    const Vec3 origin = s.position + 1e-3 * std::min(s.scale_u, s.scale_v) * n;
    for (int k = 0; k < samples; ++k) {
      const Ray ray{origin, dirs[k]};
      table.values[i * samples + k] =
          transmittance(ray, bvh, surfels, kInfinity, static_cast<int>(i));
    }
  }
  return table;
}

ProxyBenchResult bench_proxy(std::span<const Surfel> surfels, std::span<const Ray> rays,
                             double alpha_min) {
  using clock = std::chrono::steady_clock;
  ProxyBenchResult result;
  const SurfelBvh bvh = SurfelBvh::build(surfels, alpha_min);
  for (const Ray& ray : rays) {
    bvh.traverse(ray, kInfinity, LeafTest::AabbOnly, [&](int) { ++result.candidate_hits_aabb; });
    bvh.traverse(ray, kInfinity, LeafTest::Hull, [&](int) { ++result.candidate_hits_proxy; });
  }
  result.ratio = result.candidate_hits_aabb == 0
                     ? 1.0
                     : static_cast<double>(result.candidate_hits_proxy) /
                           static_cast<double>(result.candidate_hits_aabb);
  double sink = 0.0;
  auto t0 = clock::now();
  for (const Ray& ray : rays) sink += transmittance(ray, bvh, surfels, kInfinity, -1, LeafTest::Hull);
  auto t1 = clock::now();
  for (const Ray& ray : rays)
    sink += transmittance(ray, bvh, surfels, kInfinity, -1, LeafTest::AabbOnly);
  auto t2 = clock::now();
  result.seconds_proxy = std::chrono::duration<double>(t1 - t0).count();
  result.seconds_aabb = std::chrono::duration<double>(t2 - t1).count() + 0.0 * sink;
  return result;
}

}  // namespace glosskit
