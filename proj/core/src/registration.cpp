#include "hipnav/registration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>


namespace hipnav {
namespace {

Point3 centroid(const std::vector<Point3>& pts) {
  Point3 sum = Point3::Zero();
  for (const auto& p : pts) sum += p;
  return sum / static_cast<double>(pts.size());
}

Eigen::MatrixXd demeaned(const std::vector<Point3>& pts, const Point3& mean) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(pts.size()), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) = (pts[i] - mean).transpose();
  }
  return m;
}

}  // namespace

void Correspondences::validate() const {
  if (p.size() != q.size()) {
    throw Error(ErrorCode::SizeMismatch, "correspondence lists differ in length (" +
                                             std::to_string(p.size()) + " vs " +
                                             std::to_string(q.size()) + ")");
  }
  if (p.size() < 3) {
    throw Error(ErrorCode::InvalidArgument, "at least 3 correspondences are required");
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!is_finite(p[i]) || !is_finite(q[i])) {
      throw Error(ErrorCode::InvalidArgument, "non-finite correspondence at index " + std::to_string(i));
    }
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(demeaned(p, centroid(p)));
  const auto& s = svd.singularValues();
  if (!(s(0) > 0.0) || s(1) <= 1e-10 * s(0)) {
    throw Error(ErrorCode::DegenerateConfiguration, "source points are collinear");
  }
}

Correspondences Correspondences::subset(const std::vector<std::size_t>& indices) const {
  Correspondences out;
  out.p_frame = p_frame;
  out.q_frame = q_frame;
  out.p.reserve(indices.size());
  out.q.reserve(indices.size());
  for (auto i : indices) {
    out.p.push_back(p.at(i));
    out.q.push_back(q.at(i));
  }
  return out;
}

RigidTransform kabsch(const Correspondences& c) {
  c.validate();

  const Point3 p_mean = centroid(c.p);
  const Point3 q_mean = centroid(c.q);
  const Eigen::Matrix3d h = demeaned(c.p, p_mean).transpose() * demeaned(c.q, q_mean);

  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d u = svd.matrixU();
  Eigen::Matrix3d v = svd.matrixV();
  Eigen::Matrix3d r = v * u.transpose();
  if (r.determinant() < 0.0) {
    // Singular values are sorted descending; flip the axis of least support.
    v.col(2) *= -1.0;
    r = v * u.transpose();
  }
  const Point3 t = q_mean - r * p_mean;
  return RigidTransform(r, t, c.p_frame, c.q_frame);
}

std::vector<double> residuals(const RigidTransform& t, const Correspondences& c) {
  if (c.p.size() != c.q.size()) {
    throw Error(ErrorCode::SizeMismatch, "correspondence lists differ in length");
  }
  std::vector<double> out(c.p.size());
  for (std::size_t i = 0; i < c.p.size(); ++i) {
    out[i] = (c.q[i] - apply(t, c.p[i])).norm();
  }
  return out;
}

double rms(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v * v;
  return std::sqrt(sum / static_cast<double>(values.size()));
}

RegistrationResult register_filtered(const Correspondences& c, const RegistrationOptions& options) {
  if (!(options.beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "beta must be positive");
  if (options.max_rounds == 0) throw Error(ErrorCode::InvalidArgument, "max_rounds must be >= 1");
  c.validate();

  std::vector<std::size_t> retained(c.size());
  std::iota(retained.begin(), retained.end(), std::size_t{0});
  std::vector<std::size_t> rejected;
  std::vector<double> history;

  for (std::size_t round = 1; round <= options.max_rounds; ++round) {
    const Correspondences active = c.subset(retained);
    const RigidTransform fit = kabsch(active);
    const std::vector<double> res = residuals(fit, active);
    history.push_back(rms(res));

    const double worst = *std::max_element(res.begin(), res.end());
    if (worst < options.beta) {
      std::sort(rejected.begin(), rejected.end());
      return RegistrationResult{fit,       residuals(fit, c), retained, rejected,
                                round,     history.back(),    history};
    }

    std::vector<std::size_t> keep;
    for (std::size_t k = 0; k < retained.size(); ++k) {
      if (res[k] < options.beta) {
        keep.push_back(retained[k]);
      } else {
        rejected.push_back(retained[k]);
      }
    }
    if (keep.size() < options.min_pairs) {
      throw Error(ErrorCode::RegistrationExhausted,
                  "only " + std::to_string(keep.size()) + " pairs below beta after round " +
                      std::to_string(round));
    }
    retained = std::move(keep);
  }
  throw Error(ErrorCode::RegistrationExhausted,
              "residuals still exceed beta after " + std::to_string(options.max_rounds) + " rounds");
}

RigidTransform chain_image_to_base(const RigidTransform& t_cam_pic, const RigidTransform& t_base_cam) {
  if (t_cam_pic.from_frame() != FrameTag::Pic || t_cam_pic.to_frame() != FrameTag::Cam ||
      t_base_cam.from_frame() != FrameTag::Cam || t_base_cam.to_frame() != FrameTag::Base) {
    throw Error(ErrorCode::FrameMismatch, "expected Pic->Cam and Cam->Base transforms");
  }
  return compose(t_base_cam, t_cam_pic);
}

}  // namespace hipnav
