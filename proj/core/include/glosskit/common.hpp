// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <ceres/jet.h>

namespace glosskit {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Rgb = Eigen::Array3d;

template <class T>
using Vec3T = Eigen::Matrix<T, 3, 1>;
template <class T>
using Mat3T = Eigen::Matrix<T, 3, 3>;

inline constexpr double kPi = 3.14159265358979323846;

/// Every recoverable failure in the library surfaces as this exception type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Value part of a scalar used in templated kernels (double or ceres::Jet).
inline double value_of(double x) { return x; }
template <class T, int N>
double value_of(const ceres::Jet<T, N>& x) {
  return x.a;
}

template <class T>
Vec3 value_of(const Vec3T<T>& v) {
  return Vec3(value_of(v.x()), value_of(v.y()), value_of(v.z()));
}

/// Running hash of the discrete branch decisions taken by a forward
/// evaluation. Two evaluations whose traces agree took identical branches,
/// so finite differences between them are free of cutoff jumps.
class BranchTrace {
 public:
  void mix(std::uint64_t v) {
    hash_ ^= v + 0x9e3779b97f4a7c15ULL + (hash_ << 6) + (hash_ >> 2);
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

inline void trace(BranchTrace* t, std::uint64_t v) {
  if (t) t->mix(v);
}

}  // namespace glosskit
