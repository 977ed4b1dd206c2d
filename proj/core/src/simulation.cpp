#include "hipnav/simulation.hpp"

#include <cmath>
#include <string>


namespace hipnav {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Eigen::Matrix3d rotation_from_vector(const Eigen::Vector3d& omega) {
  const double angle = omega.norm();
  if (angle == 0.0) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(angle, omega / angle).toRotationMatrix();
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : name) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(master) ^ h);
}

void TrackerModel::validate() const {
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw Error(ErrorCode::InvalidArgument, "tracker noise_sigma must be >= 0");
  }
  if (!is_finite(fov.min) || !is_finite(fov.max) || !(fov.volume() > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "tracker field of view must have positive volume");
  }
}

OpticalTracker::OpticalTracker(TrackerModel model) : model_(std::move(model)), rng_(model_.seed) {
  model_.validate();
}

std::optional<Point3> OpticalTracker::measure(const Point3& true_point) {
  if (!model_.fov.contains(true_point)) return std::nullopt;
  return Point3(true_point + model_.noise_sigma * rng_.gaussian3());
}

std::optional<Point3> tracker_measure(OpticalTracker& tracker, const Point3& true_point) {
  return tracker.measure(true_point);
}

void RobotModel::validate() const {
  if (!(jitter_sigma_trans >= 0.0) || !(jitter_sigma_rot >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "robot jitter sigmas must be >= 0");
  }
  if (pose_bias.from_frame() != FrameTag::Tool || pose_bias.to_frame() != FrameTag::Tool) {
    throw Error(ErrorCode::FrameMismatch, "robot pose bias must be a Tool->Tool transform");
  }
  if (!std::isfinite(angle_bias.abduction) || !std::isfinite(angle_bias.anteversion)) {
    throw Error(ErrorCode::InvalidArgument, "robot angle bias must be finite");
  }
}

SimulatedRobot::SimulatedRobot(RobotModel model) : model_(std::move(model)), rng_(model_.seed) {
  model_.validate();
}

RigidTransform SimulatedRobot::move(const RigidTransform& command) {
  if (command.from_frame() != FrameTag::Tool) {
    throw Error(ErrorCode::FrameMismatch, "robot commands are Tool poses");
  }
  // Fixed draw order: translation first, then rotation vector.
  const Eigen::Vector3d dt = model_.jitter_sigma_trans * rng_.gaussian3();
  const Eigen::Vector3d omega = deg_to_rad(model_.jitter_sigma_rot) * rng_.gaussian3();
  const RigidTransform jitter(rotation_from_vector(omega), dt, FrameTag::Tool, FrameTag::Tool);
  return compose(compose(command, model_.pose_bias), jitter);
}

RigidTransform SimulatedRobot::orient_tool(const AnglePair& commanded, const Point3& position, FrameTag frame) {
  const Eigen::Vector3d dt = model_.jitter_sigma_trans * rng_.gaussian3();
  const double d_abd = model_.jitter_sigma_rot * rng_.gaussian();
  const double d_ante = model_.jitter_sigma_rot * rng_.gaussian();
  const AnglePair achieved{commanded.abduction + model_.angle_bias.abduction + d_abd,
                           commanded.anteversion + model_.angle_bias.anteversion + d_ante};
  return RigidTransform(rotation_from_angles(achieved), position + dt, FrameTag::Tool, frame);
}

RigidTransform robot_move(SimulatedRobot& robot, const RigidTransform& command) {
  return robot.move(command);
}

void MarkerBody::validate() const {
  if (balls.size() < 3) {
    throw Error(ErrorCode::InvalidArgument, "marker body '" + name + "' needs at least 3 balls");
  }
  if (!(ball_radius > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "marker body '" + name + "' needs a positive ball radius");
  }
  for (const auto& b : balls) {
    if (!is_finite(b)) throw Error(ErrorCode::InvalidArgument, "marker body '" + name + "' has non-finite balls");
  }
  const Eigen::Vector3d u = balls[1] - balls[0];
  bool spans_plane = false;
  for (std::size_t k = 2; k < balls.size() && !spans_plane; ++k) {
    spans_plane = u.cross(balls[k] - balls[0]).norm() > 1e-9;
  }
  if (!spans_plane) {
    throw Error(ErrorCode::DegenerateConfiguration, "marker body '" + name + "' balls are collinear");
  }
}

const MarkerBody& Phantom::body(std::string_view name) const {
  for (const auto& b : bodies) {
    if (b.name == name) return b;
  }
  throw Error(ErrorCode::UnknownBody, "no marker body named '" + std::string(name) + "'");
}

void Phantom::validate() const {
  for (const auto& b : bodies) b.validate();
  const auto& l = landmarks;
  if (!is_finite(l.hip_reference) || !is_finite(l.left_ankle) || !is_finite(l.right_ankle) ||
      !is_finite(l.osteotomy[0]) || !is_finite(l.osteotomy[1]) || !is_finite(l.osteotomy[2]) ||
      !is_finite(calibration_marker)) {
    throw Error(ErrorCode::InvalidArgument, "phantom landmarks must be finite");
  }
  if (base_to_cam.from_frame() != FrameTag::Base || base_to_cam.to_frame() != FrameTag::Cam) {
    throw Error(ErrorCode::FrameMismatch, "phantom base_to_cam must be Base->Cam");
  }
  if (patient_to_cam.from_frame() != FrameTag::Patient || patient_to_cam.to_frame() != FrameTag::Cam) {
    throw Error(ErrorCode::FrameMismatch, "phantom patient_to_cam must be Patient->Cam");
  }
}

Correspondences calibration_dance(SimulatedRobot& robot, OpticalTracker& tracker, const Phantom& phantom,
                                  const RigidTransform& start, double step, const GridSize& grid) {
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "calibration step must be positive");
  if (start.from_frame() != FrameTag::Tool || start.to_frame() != FrameTag::Base) {
    throw Error(ErrorCode::FrameMismatch, "calibration start pose must be Tool->Base");
  }

  Correspondences pairs;
  pairs.p_frame = FrameTag::Base;
  pairs.q_frame = FrameTag::Cam;
  for (std::size_t i = 0; i < grid.nx; ++i) {
    for (std::size_t j = 0; j < grid.ny; ++j) {
      for (std::size_t k = 0; k < grid.nz; ++k) {
        const Point3 offset(step * static_cast<double>(i), step * static_cast<double>(j),
                            step * static_cast<double>(k));
        const RigidTransform command(start.rotation(), start.translation() + offset, FrameTag::Tool,
                                     FrameTag::Base);
        const Point3 commanded_ball = apply(command, phantom.calibration_marker);
        const RigidTransform achieved = robot.move(command);
        const Point3 true_ball = apply(phantom.base_to_cam, apply(achieved, phantom.calibration_marker));
        const auto seen = tracker.measure(true_ball);
        if (!seen) continue;
        pairs.p.push_back(commanded_ball);
        pairs.q.push_back(*seen);
      }
    }
  }
  if (pairs.size() < 4) {
    throw Error(ErrorCode::InsufficientPairs,
                "calibration collected " + std::to_string(pairs.size()) + " in-view pairs, need 4");
  }
  return pairs;
}

PointCloud synth_ct_markers(const Phantom& phantom, std::string_view body_name, std::size_t points_per_ball,
                            const RigidTransform& pic_pose, std::uint64_t seed) {
  const MarkerBody& body = phantom.body(body_name);
  if (points_per_ball < 20) throw Error(ErrorCode::InvalidArgument, "points_per_ball must be >= 20");
  if (pic_pose.from_frame() != body.frame || pic_pose.to_frame() != FrameTag::Pic) {
    throw Error(ErrorCode::FrameMismatch, "pic_pose must map the body frame into Pic");
  }

  Rng rng(seed);
  PointCloud cloud;
  cloud.frame = FrameTag::Pic;
  cloud.points.reserve(body.balls.size() * points_per_ball);
  for (const auto& center : body.balls) {
    for (std::size_t s = 0; s < points_per_ball; ++s) {
      Eigen::Vector3d dir = rng.gaussian3();
      while (dir.norm() < 1e-12) dir = rng.gaussian3();
      const Point3 surface = center + body.ball_radius * dir.normalized();
      cloud.points.push_back(apply(pic_pose, surface));
    }
  }
  return cloud;
}

}  // namespace hipnav
