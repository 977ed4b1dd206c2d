#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hipnav/geometry.hpp"

namespace hipnav {

struct Sphere {
  Point3 center = Point3::Zero();
  double radius = 0.0;
};

struct SphereFit {
  Sphere sphere;
  double rms = 0.0;  ///< rms of |p - center| - radius
};

/// Plane a x + b y + c z + d = 0 with (a, b, c) of unit length.
struct Plane {
  double a = 0.0;
  double b = 0.0;
  double c = 1.0;
  double d = 0.0;

  Eigen::Vector3d normal() const { return {a, b, c}; }
};

/// Algebraic least squares: solves 2 c·p_i + k = |p_i|^2 for (c, k) and takes
/// radius = sqrt(k + |c|^2). Throws DegenerateFit for fewer than 4 points or
/// coplanar/collinear input.
SphereFit fit_sphere(std::span<const Point3> points);

/// Plane through three points, normal = (p2 - p1) x (p3 - p1) normalized.
/// Throws CollinearPoints when |(p2 - p1) x (p3 - p1)| <= 1e-9 mm^2.
Plane fit_plane_3pts(const Point3& p1, const Point3& p2, const Point3& p3);

/// |a x + b y + c z + d| / |(a, b, c)|.
double point_plane_distance(const Plane& plane, const Point3& p);

struct MatchResult {
  std::vector<std::size_t> permutation;  ///< a[i] pairs with b[permutation[i]]
  double cost = 0.0;                     ///< sum of squared pairwise-distance differences, mm^2
};

/// Pairs two small point sets (3..8 points) by exhaustive search over
/// permutations, minimizing the mismatch of their pairwise-distance signatures.
/// Throws SizeMismatch, InvalidArgument (n out of range) or AmbiguousMatch when
/// the runner-up scores within `ambiguity_margin` mm^2 of the best.
MatchResult match_correspondence(std::span<const Point3> a, std::span<const Point3> b,
                                 double ambiguity_margin = 0.01);

}  // namespace hipnav
