#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "hipnav/errors.hpp"
#include "hipnav/geometry.hpp"

namespace hipnav::testing {

inline Point3 random_point(std::mt19937_64& rng, double scale = 100.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

inline Matrix3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline RigidTransform random_transform(std::mt19937_64& rng, FrameTag from, FrameTag to) {
  return RigidTransform(random_rotation(rng), random_point(rng, 500.0), from, to);
}

inline std::vector<Point3> random_points(std::mt19937_64& rng, std::size_t n, double scale = 100.0) {
  std::vector<Point3> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_point(rng, scale));
  return out;
}

inline Matrix3 rot_z(double deg) {
  return Eigen::AngleAxisd(deg * M_PI / 180.0, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

/// Code of the hipnav::Error thrown by f; fails the test if nothing is thrown.
template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no hipnav::Error thrown";
  return ErrorCode::Io;
}

}  // namespace hipnav::testing
