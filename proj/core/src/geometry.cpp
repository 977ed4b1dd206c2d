#include "hipnav/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>


namespace hipnav {

std::string_view to_string(FrameTag tag) noexcept {
  switch (tag) {
    case FrameTag::Base: return "Base";
    case FrameTag::Cam: return "Cam";
    case FrameTag::Pic: return "Pic";
    case FrameTag::Patient: return "Patient";
    case FrameTag::Tool: return "Tool";
  }
  return "?";
}

FrameTag frame_from_string(std::string_view name) {
  for (auto tag : {FrameTag::Base, FrameTag::Cam, FrameTag::Pic, FrameTag::Patient, FrameTag::Tool}) {
    if (name == to_string(tag)) return tag;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown frame tag '" + std::string(name) + "'");
}

bool is_finite(const Point3& p) noexcept {
  return std::isfinite(p.x()) && std::isfinite(p.y()) && std::isfinite(p.z());
}

double deg_to_rad(double deg) noexcept { return deg * std::numbers::pi / 180.0; }
double rad_to_deg(double rad) noexcept { return rad * 180.0 / std::numbers::pi; }

UnitVec3::UnitVec3(const Eigen::Vector3d& v) : v_(v) {
  if (!is_finite(v) || std::abs(v.norm() - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "vector is not unit length");
  }
}

UnitVec3 UnitVec3::normalized(const Eigen::Vector3d& v) {
  const double n = v.norm();
  if (!(n > 1e-12) || !std::isfinite(n)) {
    throw Error(ErrorCode::DegenerateAxis, "cannot normalize a zero-length direction");
  }
  return UnitVec3(v / n, Unchecked{});
}

RigidTransform::RigidTransform(const Matrix3& rotation, const Point3& translation, FrameTag from,
                               FrameTag to, double tolerance)
    : rotation_(rotation), translation_(translation), from_(from), to_(to) {
  if (!rotation.allFinite() || !is_finite(translation)) {
    throw Error(ErrorCode::InvalidArgument, "transform has non-finite entries");
  }
  const double ortho = (rotation.transpose() * rotation - Matrix3::Identity()).cwiseAbs().maxCoeff();
  const double det = rotation.determinant();
  if (ortho > tolerance || std::abs(det - 1.0) > tolerance) {
    throw Error(ErrorCode::InvalidArgument, "rotation is not in SO(3)");
  }
}

RigidTransform RigidTransform::identity(FrameTag from, FrameTag to) {
  return RigidTransform(Matrix3::Identity(), Point3::Zero(), from, to, Unchecked{});
}

RigidTransform RigidTransform::from_translation(const Point3& t, FrameTag from, FrameTag to) {
  return RigidTransform(Matrix3::Identity(), t, from, to);
}

RigidTransform RigidTransform::from_axis_angle(const Eigen::Vector3d& axis, double angle_deg,
                                               const Point3& t, FrameTag from, FrameTag to) {
  const double n = axis.norm();
  if (!(n > 0.0)) throw Error(ErrorCode::InvalidArgument, "rotation axis has zero length");
  const Matrix3 r = Eigen::AngleAxisd(deg_to_rad(angle_deg), axis / n).toRotationMatrix();
  return RigidTransform(r, t, from, to);
}

RigidTransform RigidTransform::from_matrix(const Eigen::Matrix4d& h, FrameTag from, FrameTag to) {
  return RigidTransform(h.topLeftCorner<3, 3>(), h.topRightCorner<3, 1>(), from, to);
}

Eigen::Matrix4d RigidTransform::matrix() const {
  Eigen::Matrix4d h = Eigen::Matrix4d::Identity();
  h.topLeftCorner<3, 3>() = rotation_;
  h.topRightCorner<3, 1>() = translation_;
  return h;
}

RigidTransform RigidTransform::retagged(FrameTag from, FrameTag to) const {
  return RigidTransform(rotation_, translation_, from, to, Unchecked{});
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  if (a.from_ != b.to_) {
    throw Error(ErrorCode::FrameMismatch,
                "cannot compose " + std::string(to_string(a.from_)) + "->" +
                    std::string(to_string(a.to_)) + " after " + std::string(to_string(b.from_)) +
                    "->" + std::string(to_string(b.to_)));
  }
  return RigidTransform(a.rotation_ * b.rotation_, a.rotation_ * b.translation_ + a.translation_,
                        b.from_, a.to_, RigidTransform::Unchecked{});
}

RigidTransform invert(const RigidTransform& t) {
  const Matrix3 rt = t.rotation_.transpose();
  return RigidTransform(rt, -(rt * t.translation_), t.to_, t.from_, RigidTransform::Unchecked{});
}

Point3 apply(const RigidTransform& t, const Point3& p) {
  return t.rotation() * p + t.translation();
}

Eigen::Vector3d apply_rotation(const RigidTransform& t, const Eigen::Vector3d& v) {
  return t.rotation() * v;
}

double rotation_distance(const Matrix3& a, const Matrix3& b) {
  // Quaternion route keeps precision near zero where acos((tr - 1) / 2) does not.
  const Eigen::Quaterniond q(Matrix3(a.transpose() * b));
  return 2.0 * std::atan2(q.vec().norm(), std::abs(q.w()));
}

bool in_domain(const AnglePair& a) noexcept {
  return a.abduction >= 0.0 && a.abduction <= 90.0 && a.anteversion > -90.0 && a.anteversion < 90.0;
}

UnitVec3 axis_from_angles(const AnglePair& angles) {
  if (!std::isfinite(angles.abduction) || !std::isfinite(angles.anteversion) ||
      std::abs(angles.anteversion) >= 90.0) {
    throw Error(ErrorCode::InvalidArgument, "anteversion must lie in (-90, 90) degrees");
  }
  const double a = deg_to_rad(angles.abduction);
  const double b = deg_to_rad(angles.anteversion);
  return UnitVec3::normalized(
      Eigen::Vector3d(std::sin(a) * std::cos(b), std::sin(b), std::cos(a) * std::cos(b)));
}

AnglePair angles_from_axis(const UnitVec3& axis) {
  const double horizontal = std::hypot(axis.x(), axis.z());
  if (horizontal < 1e-12) {
    throw Error(ErrorCode::DegenerateAxis, "abduction is undefined for an axis along patient y");
  }
  // atan2 form of arcsin(y): identical for unit vectors, better conditioned near the pole.
  return {rad_to_deg(std::atan2(axis.x(), axis.z())), rad_to_deg(std::atan2(axis.y(), horizontal))};
}

Matrix3 rotation_from_angles(const AnglePair& angles) {
  const double a = deg_to_rad(angles.abduction);
  const double b = deg_to_rad(angles.anteversion);
  return (Eigen::AngleAxisd(a, Eigen::Vector3d::UnitY()) * Eigen::AngleAxisd(-b, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

AngleError angular_error(const AnglePair& a, const AnglePair& b) {
  return {std::abs(a.abduction - b.abduction), std::abs(a.anteversion - b.anteversion)};
}

}  // namespace hipnav
