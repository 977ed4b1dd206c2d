#pragma once

// Deterministic stand-ins for the hardware: an optical locator with Gaussian
// noise and a box-shaped field of view, a robot arm with a constant pose bias
// plus Gaussian jitter, and a phantom holding the ground truth.
//
// Every device owns its own generator. Seeds for different devices are derived
// from one scenario seed by name, so adding a device never shifts another
// device's draws.

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "hipnav/geometry.hpp"
#include "hipnav/pointcloud.hpp"
#include "hipnav/registration.hpp"

namespace hipnav {

/// Seed for the stream `name` under `master` (splitmix64 over an FNV-1a name hash).
std::uint64_t derive_seed(std::uint64_t master, std::string_view name);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double gaussian() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  Eigen::Vector3d gaussian3() {
    const double x = gaussian();
    const double y = gaussian();
    const double z = gaussian();
    return {x, y, z};
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

struct Aabb {
  Point3 min = Point3::Constant(-1000.0);
  Point3 max = Point3::Constant(1000.0);

  bool contains(const Point3& p) const noexcept {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  double volume() const noexcept { return (max - min).cwiseMax(0.0).prod(); }
};

struct TrackerModel {
  double noise_sigma = 0.0;  ///< mm, per axis
  Aabb fov;                  ///< in the Cam frame
  std::uint64_t seed = 0;

  void validate() const;
};

class OpticalTracker {
 public:
  explicit OpticalTracker(TrackerModel model);

  /// Noisy reading of a point given in the Cam frame, or nullopt when the
  /// point is outside the field of view (no draw is consumed in that case).
  std::optional<Point3> measure(const Point3& true_point);

  const TrackerModel& model() const noexcept { return model_; }

 private:
  TrackerModel model_;
  Rng rng_;
};

std::optional<Point3> tracker_measure(OpticalTracker& tracker, const Point3& true_point);

struct RobotModel {
  RigidTransform pose_bias = RigidTransform::identity(FrameTag::Tool, FrameTag::Tool);
  double jitter_sigma_trans = 0.0;  ///< mm, per axis
  double jitter_sigma_rot = 0.0;    ///< degrees
  /// Orientation error of the reamer-angle channel (degrees), used by orient_tool.
  AnglePair angle_bias{};
  std::uint64_t seed = 0;

  void validate() const;
};

class SimulatedRobot {
 public:
  explicit SimulatedRobot(RobotModel model);

  /// Commanded tool pose (Tool->Base) in, achieved pose out:
  /// achieved = command ∘ pose_bias ∘ jitter. Jitter is a Tool-frame motion
  /// with per-axis Gaussian translation and a Gaussian rotation vector.
  RigidTransform move(const RigidTransform& command);

  /// Task-space orientation command: place the tool origin at `position` with
  /// its +z axis along the commanded reamer angles, expressed in `frame`.
  /// The achieved angles are commanded + angle_bias + N(0, jitter_sigma_rot)
  /// per component; the position gets N(0, jitter_sigma_trans) per axis.
  RigidTransform orient_tool(const AnglePair& commanded, const Point3& position, FrameTag frame);

  const RobotModel& model() const noexcept { return model_; }

 private:
  RobotModel model_;
  Rng rng_;
};

RigidTransform robot_move(SimulatedRobot& robot, const RigidTransform& command);

/// Retro-reflective balls rigidly attached to one frame.
struct MarkerBody {
  std::string name;
  FrameTag frame = FrameTag::Patient;
  std::vector<Point3> balls;  ///< centers in the body frame
  double ball_radius = 5.0;

  void validate() const;
};

/// Anatomical points in the Patient frame.
struct Landmarks {
  Point3 hip_reference = Point3::Zero();
  Point3 left_ankle{0.0, 0.0, -832.128};
  Point3 right_ankle{0.0, 0.0, -832.298};
  std::array<Point3, 3> osteotomy{Point3{0.0, 0.0, 0.0}, Point3{20.0, 0.0, 0.0}, Point3{0.0, 20.0, 0.0}};
};

struct Phantom {
  std::vector<MarkerBody> bodies;
  Landmarks landmarks;
  RigidTransform base_to_cam = RigidTransform::identity(FrameTag::Base, FrameTag::Cam);
  RigidTransform patient_to_cam = RigidTransform::identity(FrameTag::Patient, FrameTag::Cam);
  /// Calibration ball center in the Tool frame (flange-to-ball offset).
  Point3 calibration_marker{0.0, 0.0, 100.0};

  /// Throws UnknownBody.
  const MarkerBody& body(std::string_view name) const;
  void validate() const;
};

struct GridSize {
  std::size_t nx = 3;
  std::size_t ny = 3;
  std::size_t nz = 3;
  std::size_t count() const noexcept { return nx * ny * nz; }
};

/// Steps the tool over an nx x ny x nz grid (base-frame offsets of `step` mm
/// from `start`, orientation held). Pairs the commanded calibration-ball
/// center (Base) with the tracker reading of the true center (Cam); samples
/// out of view are skipped. Throws InsufficientPairs below 4 pairs.
Correspondences calibration_dance(SimulatedRobot& robot, OpticalTracker& tracker, const Phantom& phantom,
                                  const RigidTransform& start, double step, const GridSize& grid);

/// Uniform samples on every ball surface of `body`, mapped into Pic by
/// `pic_pose` (body frame -> Pic). Ball order is preserved: points
/// [k * points_per_ball, (k + 1) * points_per_ball) belong to ball k.
PointCloud synth_ct_markers(const Phantom& phantom, std::string_view body, std::size_t points_per_ball,
                            const RigidTransform& pic_pose, std::uint64_t seed);

}  // namespace hipnav
