#include "hipnav/runner.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "hipnav/fitting.hpp"
#include "hipnav/navigation.hpp"
#include "hipnav/registration.hpp"

namespace hipnav {
namespace {

std::string shift_label(double shift) {
  if (shift == 0.0) return "No";
  char buf[48];
  std::snprintf(buf, sizeof buf, "Down %g mm", shift);
  return buf;
}

std::string stream(std::string_view test, std::size_t repeat, std::string_view device) {
  return std::string(test) + "/" + std::to_string(repeat) + "/" + std::string(device);
}

class Recorder {
 public:
  Recorder(Report& report, std::string test, std::size_t repeat)
      : report_(report), test_(std::move(test)), repeat_(repeat) {}

  void add(std::string name, std::string variation, double value) {
    report_.rows.push_back({test_, repeat_, std::move(name), std::move(variation), value});
  }

 private:
  Report& report_;
  std::string test_;
  std::size_t repeat_;
};

std::vector<Point3> track_balls(OpticalTracker& tracker, const MarkerBody& body, const RigidTransform& body_in_cam) {
  std::vector<Point3> out;
  for (const auto& ball : body.balls) {
    const auto m = tracker.measure(apply(body_in_cam, ball));
    if (!m) throw Error(ErrorCode::InvalidArgument, "ball of '" + body.name + "' outside the field of view");
    out.push_back(*m);
  }
  return out;
}

void run_test1(const Scenario& s, std::uint64_t seed, std::size_t repeat, Report& report) {
  const PositioningTest& t = *s.test1;
  const Phantom& ph = s.phantom;
  Recorder rec(report, "test1", repeat);

  TrackerModel tm = s.tracker;
  tm.seed = derive_seed(seed, stream("test1", repeat, "tracker"));
  RobotModel rm = s.robot;
  rm.seed = derive_seed(seed, stream("test1", repeat, "robot"));
  OpticalTracker tracker(tm);
  SimulatedRobot robot(rm);

  // Hand-eye calibration.
  const Correspondences pairs = calibration_dance(robot, tracker, ph, t.start, t.step, t.grid);
  const RegistrationResult calib = register_filtered(pairs, {.beta = t.beta, .max_rounds = t.max_rounds});
  rec.add("calibration_rms", "", calib.rms);
  rec.add("calibration_rejected", "", static_cast<double>(calib.rejected.size()));
  rec.add("calibration_rotation_error_deg", "",
          rad_to_deg(rotation_distance(calib.transform.rotation(), ph.base_to_cam.rotation())));
  rec.add("calibration_translation_error", "", (calib.transform.translation() - ph.base_to_cam.translation()).norm());

  // Image-to-tracker registration of the patient marker body.
  const MarkerBody& body = ph.body(t.patient_body);
  const PointCloud ct = synth_ct_markers(ph, body.name, t.points_per_ball, t.pic_pose,
                                         derive_seed(seed, stream("test1", repeat, "ct")));
  const std::vector<Point3> tracked = track_balls(tracker, body, ph.patient_to_cam);
  const ImageRegistration img = register_image_to_tracker(ct, tracked, t.link_radius, t.beta);
  rec.add("image_registration_rms", "", img.registration.rms);

  // Drive the tool tip to each planned image point and measure where it went.
  const RigidTransform pic_to_base = chain_image_to_base(img.registration.transform, invert(calib.transform));
  const RigidTransform true_pic_to_cam = compose(ph.patient_to_cam, invert(t.pic_pose));
  const Point3& tip = ph.calibration_marker;
  for (const auto& target : t.targets) {
    const Point3 target_base = apply(pic_to_base, target);
    const RigidTransform command(t.start.rotation(), target_base - t.start.rotation() * tip, FrameTag::Tool,
                                 FrameTag::Base);
    const RigidTransform achieved = robot.move(command);
    const auto seen = tracker.measure(apply(ph.base_to_cam, apply(achieved, tip)));
    if (!seen) throw Error(ErrorCode::InvalidArgument, "tool tip left the field of view at a target");
    const Point3 err = *seen - apply(true_pic_to_cam, target);
    rec.add("positioning_error", "x", std::abs(err.x()));
    rec.add("positioning_error", "y", std::abs(err.y()));
    rec.add("positioning_error", "z", std::abs(err.z()));
    rec.add("positioning_error", "euclidean", err.norm());
  }
}

void run_test2(const Scenario& s, std::uint64_t seed, std::size_t repeat, Report& report) {
  const AlignmentTest& t = *s.test2;
  Recorder rec(report, "test2", repeat);

  TrackerModel tm = s.tracker;
  tm.seed = derive_seed(seed, stream("test2", repeat, "tracker"));
  RobotModel rm = s.robot;
  rm.seed = derive_seed(seed, stream("test2", repeat, "robot"));
  OpticalTracker tracker(tm);
  SimulatedRobot robot(rm);

  AlignmentTrace trace;
  try {
    trace = feedback_align(robot, tracker, s.phantom, t.desired, t.options);
  } catch (const NonConvergenceError& e) {
    trace = e.trace();
  }
  const AlignmentStep& first = trace.steps.front();
  const AlignmentStep& last = trace.steps.back();
  rec.add("initial_error", "abduction", first.error.abduction);
  rec.add("initial_error", "anteversion", first.error.anteversion);
  rec.add("final_error", "abduction", last.error.abduction);
  rec.add("final_error", "anteversion", last.error.anteversion);
  rec.add("iterations", "", static_cast<double>(trace.steps.size()));
  rec.add("converged", "", trace.converged ? 1.0 : 0.0);
  rec.add("final_in_safe_zone", "", t.options.zone.contains(last.measured) ? 1.0 : 0.0);
}

std::vector<PressureSample> random_profile(Rng& rng, std::size_t length, double threshold) {
  // Ramp from zero to a random plateau, optionally with one excursion above
  // the threshold; about half of the profiles stay strictly below it.
  const bool crosses = rng.uniform() < 0.5;
  const double plateau = 0.8 * threshold * rng.uniform();
  const auto ramp = static_cast<std::size_t>(1 + rng.uniform() * static_cast<double>(length) / 2.0);
  const auto spike_at = static_cast<std::size_t>(rng.uniform() * static_cast<double>(length));
  std::vector<PressureSample> out;
  for (std::size_t i = 0; i < length; ++i) {
    double f = plateau * std::min(1.0, static_cast<double>(i) / static_cast<double>(ramp));
    f = std::max(0.0, f + 0.5 * rng.gaussian());
    f = std::min(f, threshold * 0.999);
    if (crosses && i >= spike_at) f = threshold + 5.0 * rng.uniform();
    out.push_back({static_cast<std::int64_t>(i), f});
  }
  return out;
}

void run_test3(const Scenario& s, std::uint64_t seed, std::size_t repeat, Report& report) {
  const EffectorTest& t = *s.test3;
  Recorder rec(report, "test3", repeat);

  for (const auto& profile : t.profiles) {
    const GrindLog log = run_profile(t.controller, profile.samples);
    double peak = 0.0;
    for (const auto& e : log.entries) peak = std::max(peak, e.force);
    rec.add("stop_tick", profile.name, log.stop_tick ? static_cast<double>(*log.stop_tick) : -1.0);
    rec.add("emergency_stop", profile.name, log.terminal_state == GrindState::EmergencyStopped ? 1.0 : 0.0);
    rec.add("final_depth", profile.name, log.entries.back().depth);
    rec.add("peak_force", profile.name, peak);
    if (profile.expect) {
      rec.add("expectation_met", profile.name, log.terminal_state == *profile.expect ? 1.0 : 0.0);
    }
    if (repeat == 0) report.grind_logs.emplace_back(profile.name, log);
  }

  if (t.random_profiles == 0) return;
  Rng rng(derive_seed(seed, stream("test3", repeat, "profiles")));
  std::size_t violations = 0;
  std::size_t false_stops = 0;
  for (std::size_t k = 0; k < t.random_profiles; ++k) {
    const auto profile = random_profile(rng, t.random_length, t.controller.pressure_threshold);
    std::optional<std::int64_t> first_cross;
    for (const auto& p : profile) {
      if (p.force >= t.controller.pressure_threshold) {
        first_cross = p.tick;
        break;
      }
    }
    const GrindLog log = run_profile(t.controller, profile);
    const bool stopped = log.terminal_state == GrindState::EmergencyStopped;
    const bool completed_first = log.terminal_state == GrindState::Complete &&
                                 (!first_cross || *log.stop_tick < *first_cross);
    if (!first_cross && stopped) ++false_stops;
    if (first_cross && !completed_first && (!stopped || *log.stop_tick != *first_cross)) ++violations;
  }
  rec.add("safety_latency_violations", "", static_cast<double>(violations));
  rec.add("false_stops", "", static_cast<double>(false_stops));
}

void run_test4(const Scenario& s, std::uint64_t seed, std::size_t repeat, Report& report) {
  const MeasurementTest& t = *s.test4;
  const Phantom& ph = s.phantom;
  Recorder rec(report, "test4", repeat);

  TrackerModel tm = s.tracker;
  tm.seed = derive_seed(seed, stream("test4", repeat, "probe"));
  OpticalTracker tracker(tm);
  auto read = [&](const Point3& in_patient) { return probe(tracker, apply(ph.patient_to_cam, in_patient)); };

  // Femoral neck length for each head on the same osteotomy.
  const auto& ost = ph.landmarks.osteotomy;
  const Plane truth_plane = fit_plane_3pts(ost[0], ost[1], ost[2]);
  const Point3 foot = (ost[0] + ost[1] + ost[2]) / 3.0;
  std::vector<HeadCandidate> candidates;
  for (const auto& h : t.heads) {
    const Point3 apex = foot + (h.center_height + h.head.radius) * truth_plane.normal();
    const NeckMeasurement m = measure_neck_length(read(ost[0]), read(ost[1]), read(ost[2]), read(apex), h.head);
    rec.add("neck_e", h.head.id, m.e);
    rec.add("neck_e_error", h.head.id, std::abs(m.e - (h.center_height + h.head.radius)));
    rec.add("neck_c", h.head.id, m.c);
    candidates.push_back({h.head, m});
  }
  const double c0 = desired_neck_length(t.planned_e0, t.planned_radius);
  rec.add("selected_head_size", "", select_head(c0, candidates).size);

  // Leg lengths, hip reference block to ankle, with the left limb moved down.
  const Eigen::Vector3d down(0.0, 0.0, -1.0);
  double left_baseline = 0.0;
  for (double shift : t.limb_shifts) {
    const std::string label = shift_label(shift);
    const ProbeReading hip = read(ph.landmarks.hip_reference);
    const double left = measure_leg_length(hip, read(ph.landmarks.left_ankle + shift * down));
    const double right = measure_leg_length(hip, read(ph.landmarks.right_ankle));
    rec.add("Left limb", label, left);
    if (shift == 0.0) {
      rec.add("Right limb", label, right);
      left_baseline = left;
    } else {
      rec.add("shift_error", label, std::abs((left - left_baseline) - shift));
    }
    rec.add("discrepancy", label, leg_discrepancy(left, right));
  }
}

}  // namespace

Report run_scenario(const Scenario& scenario, const RunOptions& options) {
  Report report;
  report.scenario = scenario.name;
  report.seed = options.seed_override.value_or(scenario.seed);
  report.repeats = options.repeats_override.value_or(scenario.repeats);
  if (report.repeats == 0) throw Error(ErrorCode::InvalidArgument, "repeats must be >= 1");

  for (const auto& test : scenario.tests) {
    for (std::size_t r = 0; r < report.repeats; ++r) {
      try {
        if (test == "test1") run_test1(scenario, report.seed, r, report);
        else if (test == "test2") run_test2(scenario, report.seed, r, report);
        else if (test == "test3") run_test3(scenario, report.seed, r, report);
        else if (test == "test4") run_test4(scenario, report.seed, r, report);
      } catch (const Error& e) {
        throw Error(e.code(), "scenario '" + scenario.name + "' " + test + " repeat " + std::to_string(r) + ": " + e.message());
      }
    }
  }

  report.summary = summarize(report.rows);
  report.checks = evaluate_bounds(scenario.bounds, report.summary);
  for (const auto& c : report.checks) {
    if (!c.bound.reference || !c.observed) continue;
    char buf[96];
    std::snprintf(buf, sizeof buf, " %s = %.6f vs reference %.6f", c.bound.stat.c_str(), *c.observed, *c.bound.reference);
    std::string label = c.bound.test + "/" + c.bound.name;
    if (!c.bound.variation.empty()) label += "/" + c.bound.variation;
    report.notes.push_back(label + buf);
  }
  return report;
}

Report run_scenario(const std::filesystem::path& path, const RunOptions& options) {
  return run_scenario(load_scenario(path), options);
}

}  // namespace hipnav
