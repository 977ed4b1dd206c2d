#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hipnav/fitting.hpp"
#include "hipnav/geometry.hpp"
#include "hipnav/pointcloud.hpp"
#include "hipnav/registration.hpp"
#include "hipnav/simulation.hpp"

namespace hipnav {

// ---------------------------------------------------------------------------
// Image-to-tracker registration

struct ImageRegistration {
  RegistrationResult registration;   ///< Pic -> Cam
  std::vector<Point3> image_centers; ///< fitted ball centers, cluster order
  std::vector<std::size_t> matching; ///< image center i pairs with tracked center matching[i]
};

/// Cluster the CT cloud, fit a sphere per cluster, pair the fitted centers
/// with the tracked ball centers by distance signature, then run filtered
/// registration. Throws ClusterCountMismatch, AmbiguousMatch or RegistrationExhausted.
ImageRegistration register_image_to_tracker(const PointCloud& ct_cloud, std::span<const Point3> tracked_centers,
                                            double link_radius, double beta);

// ---------------------------------------------------------------------------
// Patient-referenced poses and grinding angles

/// Pose of a rigid body in the Cam frame from its ball layout and the
/// measured ball centers (body frame -> Cam).
RigidTransform track_rigid_body(const MarkerBody& body, std::span<const Point3> measured_centers);

/// invert(patient_in_cam) ∘ tool_in_cam: Tool -> Patient. Unchanged by any
/// rigid motion applied to both the patient and the tool.
RigidTransform pose_in_patient_frame(const RigidTransform& tool_in_cam, const RigidTransform& patient_in_cam);

/// Acceptable cup orientation: centre ± half-width, inclusive.
struct SafeZone {
  double abduction_center = 40.0;
  double abduction_half_width = 10.0;
  double anteversion_center = 15.0;
  double anteversion_half_width = 10.0;

  bool contains(const AnglePair& a) const noexcept;
};

struct GrindAngleReading {
  AnglePair angles;
  bool in_safe_zone = false;
};

/// Angles of the tool +z axis in the patient frame. Throws DegenerateAxis.
GrindAngleReading measure_grind_angles(const RigidTransform& tool_in_patient, const SafeZone& zone = {});

/// Zero reference captured with the end-effector in its initialisation pose.
/// Later readings report the tool axis after removing the reference
/// orientation, so a rotation applied in the patient frame after zeroing
/// reads as that rotation.
class ZeroReference {
 public:
  void zero(const RigidTransform& tool_in_patient);
  bool is_zeroed() const noexcept { return reference_.has_value(); }
  AnglePair relative_angles(const RigidTransform& tool_in_patient) const;

 private:
  std::optional<Matrix3> reference_;
};

ZeroReference zero_initialize(const RigidTransform& tool_in_patient);

// ---------------------------------------------------------------------------
// Feedback alignment

struct AlignmentStep {
  std::size_t iteration = 0;
  AnglePair commanded;
  AnglePair measured;
  AngleError error;
};

struct AlignmentTrace {
  std::vector<AlignmentStep> steps;
  bool converged = false;
};

struct AlignmentOptions {
  double tolerance = 0.5;      ///< degrees, both components strict <
  std::size_t max_iters = 10;
  Point3 tool_position{0.0, 0.0, 60.0};  ///< reamer centre in the patient frame, held fixed
  std::string tool_body = "tool";
  std::string patient_body = "patient";
  SafeZone zone;
};

/// Thrown when alignment runs out of iterations; carries the full trace.
class NonConvergenceError : public Error {
 public:
  explicit NonConvergenceError(AlignmentTrace trace);
  const AlignmentTrace& trace() const noexcept { return trace_; }

 private:
  AlignmentTrace trace_;
};

/// Command the desired angles, measure the achieved angles through the
/// tracker, add the error back onto the command and repeat:
///   command_{k+1} = command_k + (desired - measured_k).
AlignmentTrace feedback_align(SimulatedRobot& robot, OpticalTracker& tracker, const Phantom& phantom,
                              const AnglePair& desired, const AlignmentOptions& options = {});

// ---------------------------------------------------------------------------
// Probe measurements and prosthesis selection

struct ProbeReading {
  Point3 tip = Point3::Zero();  ///< Cam frame
};

/// Probe tip reading through the tracker; throws InvalidArgument when the
/// tip is out of view.
ProbeReading probe(OpticalTracker& tracker, const Point3& true_tip_in_cam);

struct ProsthesisHead {
  std::string id;       ///< colour label
  double size = 0.0;    ///< catalog size, mm
  double radius = 0.0;  ///< geometric radius used in c = e - r, mm
};

/// Red, blue and white heads of catalog sizes 58, 59 and 60 mm; radius defaults to size / 2.
std::vector<ProsthesisHead> default_head_catalog();

struct NeckMeasurement {
  double e = 0.0;  ///< apex to osteotomy plane, mm
  double c = 0.0;  ///< rotation centre to osteotomy plane, mm
  Plane plane;
  bool implausible = false;  ///< c < 0: apex closer to the plane than one radius
};

/// Throws CollinearPoints.
NeckMeasurement measure_neck_length(const ProbeReading& p1, const ProbeReading& p2, const ProbeReading& p3,
                                    const ProbeReading& apex, const ProsthesisHead& head);

double desired_neck_length(double e0, double head_radius);

struct HeadCandidate {
  ProsthesisHead head;
  NeckMeasurement measurement;
};

/// Head whose c is closest to c0; ties (within 1e-9 mm) go to the smaller size.
ProsthesisHead select_head(double c0, std::span<const HeadCandidate> measured);

double measure_leg_length(const ProbeReading& hip_reference, const ProbeReading& ankle);

/// left - right, signed.
double leg_discrepancy(double left, double right);

}  // namespace hipnav
