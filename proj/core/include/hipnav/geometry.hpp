#pragma once

// Frame-tagged rigid transforms and the reamer-axis angle parametrization.
//
// Convention: points are column vectors and transforms act on the left, so a
// transform tagged (from = Cam, to = Base) maps camera coordinates into robot
// base coordinates: p_base = R * p_cam + t. A chain is written right to left,
//   T_base<-pic = T_base<-cam * T_cam<-pic,
// which is the column-vector reading of the product H_base^pic = H_cam^pic * H_base^cam.
// Lengths are millimetres and angles are degrees at every public boundary.

#include <string_view>

#include <Eigen/Dense>

#include "hipnav/errors.hpp"

namespace hipnav {

using Point3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;

enum class FrameTag {
  Base,     ///< robot arm base
  Cam,      ///< optical locator
  Pic,      ///< image (CT) space
  Patient,  ///< position-monitoring rigid body on the patient
  Tool,     ///< end-effector rigid body
};

std::string_view to_string(FrameTag tag) noexcept;
FrameTag frame_from_string(std::string_view name);

bool is_finite(const Point3& p) noexcept;

/// Direction with unit norm (checked to 1e-9 at construction).
class UnitVec3 {
 public:
  explicit UnitVec3(const Eigen::Vector3d& v);

  /// Normalizes `v`; throws DegenerateAxis for a (near) zero vector.
  static UnitVec3 normalized(const Eigen::Vector3d& v);

  const Eigen::Vector3d& vec() const noexcept { return v_; }
  double x() const noexcept { return v_.x(); }
  double y() const noexcept { return v_.y(); }
  double z() const noexcept { return v_.z(); }

 private:
  struct Unchecked {};
  UnitVec3(const Eigen::Vector3d& v, Unchecked) : v_(v) {}
  Eigen::Vector3d v_;
};

class RigidTransform {
 public:
  /// Validates R^T R = I and det(R) = +1 within `tolerance`.
  RigidTransform(const Matrix3& rotation, const Point3& translation, FrameTag from, FrameTag to,
                 double tolerance = 1e-9);

  static RigidTransform identity(FrameTag from, FrameTag to);
  static RigidTransform from_translation(const Point3& t, FrameTag from, FrameTag to);
  /// Rotation of `angle_deg` about `axis`, followed by translation `t`.
  static RigidTransform from_axis_angle(const Eigen::Vector3d& axis, double angle_deg,
                                        const Point3& t, FrameTag from, FrameTag to);
  static RigidTransform from_matrix(const Eigen::Matrix4d& homogeneous, FrameTag from, FrameTag to);

  const Matrix3& rotation() const noexcept { return rotation_; }
  const Point3& translation() const noexcept { return translation_; }
  FrameTag from_frame() const noexcept { return from_; }
  FrameTag to_frame() const noexcept { return to_; }

  Eigen::Matrix4d matrix() const;

  /// Same rotation and translation under different frame tags.
  RigidTransform retagged(FrameTag from, FrameTag to) const;

  friend RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
  friend RigidTransform invert(const RigidTransform& t);

 private:
  struct Unchecked {};
  RigidTransform(const Matrix3& r, const Point3& t, FrameTag from, FrameTag to, Unchecked)
      : rotation_(r), translation_(t), from_(from), to_(to) {}

  Matrix3 rotation_;
  Point3 translation_;
  FrameTag from_;
  FrameTag to_;
};

/// a ∘ b: first b, then a. Requires a.from_frame() == b.to_frame().
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);
Point3 apply(const RigidTransform& t, const Point3& p);
Eigen::Vector3d apply_rotation(const RigidTransform& t, const Eigen::Vector3d& v);

/// Geodesic angle (radians) between the rotations of two transforms.
double rotation_distance(const Matrix3& a, const Matrix3& b);

/// Abduction and anteversion of the reamer axis, in degrees.
struct AnglePair {
  double abduction = 0.0;
  double anteversion = 0.0;

  friend AnglePair operator+(const AnglePair& a, const AnglePair& b) {
    return {a.abduction + b.abduction, a.anteversion + b.anteversion};
  }
  friend AnglePair operator-(const AnglePair& a, const AnglePair& b) {
    return {a.abduction - b.abduction, a.anteversion - b.anteversion};
  }
  friend bool operator==(const AnglePair&, const AnglePair&) = default;
};

/// True for abduction in [0, 90] and anteversion in (-90, 90).
bool in_domain(const AnglePair& a) noexcept;

/// Patient frame: x medio-lateral, y anterior, z superior.
/// axis = (sin a cos b, sin b, cos a cos b) for abduction a, anteversion b.
UnitVec3 axis_from_angles(const AnglePair& angles);

/// Inverse of axis_from_angles. Abduction is atan2(x, z), anteversion is the
/// elevation out of the x-z plane. Throws DegenerateAxis at the (0, ±1, 0) pole.
AnglePair angles_from_axis(const UnitVec3& axis);

/// Rotation whose +z column is axis_from_angles(angles).
Matrix3 rotation_from_angles(const AnglePair& angles);

struct AngleError {
  double abduction = 0.0;
  double anteversion = 0.0;
  double max() const noexcept { return abduction > anteversion ? abduction : anteversion; }
};

/// Component-wise |a - b|.
AngleError angular_error(const AnglePair& a, const AnglePair& b);

double deg_to_rad(double deg) noexcept;
double rad_to_deg(double rad) noexcept;

}  // namespace hipnav
