#include "hipnav/navigation.hpp"

#include <cmath>
#include <string>

#include "hipnav/kdtree.hpp"

namespace hipnav {

ImageRegistration register_image_to_tracker(const PointCloud& ct_cloud, std::span<const Point3> tracked_centers,
                                            double link_radius, double beta) {
  if (ct_cloud.frame != FrameTag::Pic) {
    throw Error(ErrorCode::FrameMismatch, "CT cloud must be in the Pic frame");
  }
  const KdTree tree(ct_cloud);
  const auto clusters = euclidean_cluster(tree, link_radius);
  if (clusters.size() != tracked_centers.size()) {
    throw Error(ErrorCode::ClusterCountMismatch,
                "CT cloud has " + std::to_string(clusters.size()) + " marker clusters but " +
                    std::to_string(tracked_centers.size()) + " centers were tracked");
  }

  std::vector<Point3> centers;
  for (const auto& cluster : clusters) {
    std::vector<Point3> pts;
    pts.reserve(cluster.size());
    for (auto i : cluster) pts.push_back(tree.point(i));
    centers.push_back(fit_sphere(pts).sphere.center);
  }

  const MatchResult match = match_correspondence(centers, tracked_centers);

  Correspondences pairs;
  pairs.p_frame = FrameTag::Pic;
  pairs.q_frame = FrameTag::Cam;
  pairs.p = centers;
  for (auto j : match.permutation) pairs.q.push_back(tracked_centers[j]);

  RegistrationResult reg = register_filtered(pairs, {.beta = beta});
  return ImageRegistration{std::move(reg), std::move(centers), match.permutation};
}

RigidTransform track_rigid_body(const MarkerBody& body, std::span<const Point3> measured_centers) {
  Correspondences pairs;
  pairs.p_frame = body.frame;
  pairs.q_frame = FrameTag::Cam;
  pairs.p = body.balls;
  pairs.q.assign(measured_centers.begin(), measured_centers.end());
  return kabsch(pairs);
}

RigidTransform pose_in_patient_frame(const RigidTransform& tool_in_cam, const RigidTransform& patient_in_cam) {
  if (tool_in_cam.from_frame() != FrameTag::Tool || tool_in_cam.to_frame() != FrameTag::Cam ||
      patient_in_cam.from_frame() != FrameTag::Patient || patient_in_cam.to_frame() != FrameTag::Cam) {
    throw Error(ErrorCode::FrameMismatch, "expected Tool->Cam and Patient->Cam poses");
  }
  return compose(invert(patient_in_cam), tool_in_cam);
}

bool SafeZone::contains(const AnglePair& a) const noexcept {
  return std::abs(a.abduction - abduction_center) <= abduction_half_width &&
         std::abs(a.anteversion - anteversion_center) <= anteversion_half_width;
}

GrindAngleReading measure_grind_angles(const RigidTransform& tool_in_patient, const SafeZone& zone) {
  if (tool_in_patient.from_frame() != FrameTag::Tool || tool_in_patient.to_frame() != FrameTag::Patient) {
    throw Error(ErrorCode::FrameMismatch, "grind angles need a Tool->Patient pose");
  }
  const auto axis = UnitVec3::normalized(tool_in_patient.rotation().col(2));
  const AnglePair angles = angles_from_axis(axis);
  return {angles, zone.contains(angles)};
}

void ZeroReference::zero(const RigidTransform& tool_in_patient) {
  if (tool_in_patient.from_frame() != FrameTag::Tool || tool_in_patient.to_frame() != FrameTag::Patient) {
    throw Error(ErrorCode::FrameMismatch, "zero reference needs a Tool->Patient pose");
  }
  reference_ = tool_in_patient.rotation();
}

AnglePair ZeroReference::relative_angles(const RigidTransform& tool_in_patient) const {
  if (!reference_) throw Error(ErrorCode::InvalidArgument, "zero reference has not been set");
  const Matrix3 relative = tool_in_patient.rotation() * reference_->transpose();
  return angles_from_axis(UnitVec3::normalized(relative.col(2)));
}

ZeroReference zero_initialize(const RigidTransform& tool_in_patient) {
  ZeroReference ref;
  ref.zero(tool_in_patient);
  return ref;
}

NonConvergenceError::NonConvergenceError(AlignmentTrace trace)
    : Error(ErrorCode::NonConvergence,
            "angle error still above tolerance after " + std::to_string(trace.steps.size()) + " iterations"),
      trace_(std::move(trace)) {}

namespace {

RigidTransform observe_body(OpticalTracker& tracker, const MarkerBody& body, const RigidTransform& body_in_cam) {
  std::vector<Point3> seen;
  seen.reserve(body.balls.size());
  for (const auto& ball : body.balls) {
    const auto m = tracker.measure(apply(body_in_cam, ball));
    if (!m) throw Error(ErrorCode::InvalidArgument, "marker body '" + body.name + "' left the field of view");
    seen.push_back(*m);
  }
  return track_rigid_body(body, seen);
}

}  // namespace

AlignmentTrace feedback_align(SimulatedRobot& robot, OpticalTracker& tracker, const Phantom& phantom,
                              const AnglePair& desired, const AlignmentOptions& options) {
  if (!(options.tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "alignment tolerance must be positive");
  if (options.max_iters == 0) throw Error(ErrorCode::InvalidArgument, "max_iters must be >= 1");
  const MarkerBody& tool = phantom.body(options.tool_body);
  const MarkerBody& patient = phantom.body(options.patient_body);
  if (tool.frame != FrameTag::Tool || patient.frame != FrameTag::Patient) {
    throw Error(ErrorCode::FrameMismatch, "alignment needs a Tool body and a Patient body");
  }

  AlignmentTrace trace;
  AnglePair command = desired;
  for (std::size_t k = 1; k <= options.max_iters; ++k) {
    const RigidTransform achieved = robot.orient_tool(command, options.tool_position, FrameTag::Patient);
    const RigidTransform tool_in_cam = observe_body(tracker, tool, compose(phantom.patient_to_cam, achieved));
    const RigidTransform patient_in_cam = observe_body(tracker, patient, phantom.patient_to_cam);
    const AnglePair measured =
        measure_grind_angles(pose_in_patient_frame(tool_in_cam, patient_in_cam), options.zone).angles;

    const AngleError err = angular_error(desired, measured);
    trace.steps.push_back({k, command, measured, err});
    if (err.abduction < options.tolerance && err.anteversion < options.tolerance) {
      trace.converged = true;
      return trace;
    }
    command = command + (desired - measured);
  }
  throw NonConvergenceError(std::move(trace));
}

ProbeReading probe(OpticalTracker& tracker, const Point3& true_tip_in_cam) {
  const auto m = tracker.measure(true_tip_in_cam);
  if (!m) throw Error(ErrorCode::InvalidArgument, "probe tip is outside the field of view");
  return {*m};
}

std::vector<ProsthesisHead> default_head_catalog() {
  return {{"red", 58.0, 29.0}, {"blue", 59.0, 29.5}, {"white", 60.0, 30.0}};
}

NeckMeasurement measure_neck_length(const ProbeReading& p1, const ProbeReading& p2, const ProbeReading& p3,
                                    const ProbeReading& apex, const ProsthesisHead& head) {
  if (!(head.radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "head radius must be positive");
  NeckMeasurement m;
  m.plane = fit_plane_3pts(p1.tip, p2.tip, p3.tip);
  m.e = point_plane_distance(m.plane, apex.tip);
  m.c = m.e - head.radius;
  m.implausible = m.c < 0.0;
  return m;
}

double desired_neck_length(double e0, double head_radius) {
  if (!(e0 >= 0.0)) throw Error(ErrorCode::InvalidArgument, "e0 must be >= 0");
  return e0 - head_radius;
}

ProsthesisHead select_head(double c0, std::span<const HeadCandidate> measured) {
  if (measured.empty()) throw Error(ErrorCode::InvalidArgument, "no measured heads to choose from");
  constexpr double kTie = 1e-9;
  const HeadCandidate* best = &measured.front();
  double best_gap = std::abs(best->measurement.c - c0);
  for (const auto& cand : measured.subspan(1)) {
    const double gap = std::abs(cand.measurement.c - c0);
    if (gap < best_gap - kTie || (std::abs(gap - best_gap) <= kTie && cand.head.size < best->head.size)) {
      best = &cand;
      best_gap = gap;
    }
  }
  return best->head;
}

double measure_leg_length(const ProbeReading& hip_reference, const ProbeReading& ankle) {
  return (ankle.tip - hip_reference.tip).norm();
}

double leg_discrepancy(double left, double right) {
  if (!(left >= 0.0) || !(right >= 0.0)) throw Error(ErrorCode::InvalidArgument, "leg lengths must be >= 0");
  return left - right;
}

}  // namespace hipnav
