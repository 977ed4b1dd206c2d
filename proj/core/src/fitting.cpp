#include "hipnav/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>


namespace hipnav {

SphereFit fit_sphere(std::span<const Point3> points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n < 4) throw Error(ErrorCode::DegenerateFit, "sphere fit needs at least 4 points");

  // Center and scale the data so the design matrix is well conditioned.
  Point3 mean = Point3::Zero();
  for (const auto& p : points) {
    if (!is_finite(p)) throw Error(ErrorCode::InvalidArgument, "non-finite point in sphere fit");
    mean += p;
  }
  mean /= static_cast<double>(n);
  double scale = 0.0;
  for (const auto& p : points) scale += (p - mean).squaredNorm();
  scale = std::sqrt(scale / static_cast<double>(n));
  if (!(scale > 0.0)) throw Error(ErrorCode::DegenerateFit, "all points coincide");

  Eigen::MatrixXd design(n, 4);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Point3 x = (points[static_cast<std::size_t>(i)] - mean) / scale;
    design.row(i) << 2.0 * x.x(), 2.0 * x.y(), 2.0 * x.z(), 1.0;
    rhs(i) = x.squaredNorm();
  }

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(3) <= 1e-10 * sv(0)) {
    throw Error(ErrorCode::DegenerateFit, "points are coplanar or collinear");
  }
  const Eigen::Vector4d sol = svd.solve(rhs);
  const Eigen::Vector3d c = sol.head<3>();
  const double r2 = sol(3) + c.squaredNorm();
  if (!(r2 > 0.0)) throw Error(ErrorCode::DegenerateFit, "fitted radius is not real");

  SphereFit fit;
  fit.sphere.center = mean + scale * c;
  fit.sphere.radius = scale * std::sqrt(r2);
  double sum = 0.0;
  for (const auto& p : points) {
    const double e = (p - fit.sphere.center).norm() - fit.sphere.radius;
    sum += e * e;
  }
  fit.rms = std::sqrt(sum / static_cast<double>(n));
  return fit;
}

Plane fit_plane_3pts(const Point3& p1, const Point3& p2, const Point3& p3) {
  const Eigen::Vector3d cross = (p2 - p1).cross(p3 - p1);
  const double area2 = cross.norm();
  if (!(area2 > 1e-9)) throw Error(ErrorCode::CollinearPoints, "plane points are collinear");
  const Eigen::Vector3d n = cross / area2;
  return Plane{n.x(), n.y(), n.z(), -n.dot(p1)};
}

double point_plane_distance(const Plane& plane, const Point3& p) {
  const double norm = plane.normal().norm();
  return std::abs(plane.normal().dot(p) + plane.d) / norm;
}

MatchResult match_correspondence(std::span<const Point3> a, std::span<const Point3> b,
                                 double ambiguity_margin) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::SizeMismatch, "point sets differ in size (" + std::to_string(a.size()) +
                                             " vs " + std::to_string(b.size()) + ")");
  }
  const std::size_t n = a.size();
  if (n < 3 || n > 8) throw Error(ErrorCode::InvalidArgument, "matching supports 3 to 8 points");

  Eigen::MatrixXd da(n, n), db(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      da(i, j) = (a[i] - a[j]).norm();
      db(i, j) = (b[i] - b[j]).norm();
    }
  }

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  double runner_up = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_perm = perm;
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double diff = da(i, j) - db(perm[i], perm[j]);
        cost += diff * diff;
      }
    }
    if (cost < best) {
      runner_up = best;
      best = cost;
      best_perm = perm;
    } else if (cost < runner_up) {
      runner_up = cost;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  if (runner_up - best < ambiguity_margin) {
    throw Error(ErrorCode::AmbiguousMatch, "distance signatures do not single out one pairing");
  }
  return MatchResult{best_perm, best};
}

}  // namespace hipnav
