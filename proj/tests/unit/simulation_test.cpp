#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hipnav/fitting.hpp"
#include "hipnav/kdtree.hpp"
#include "hipnav/registration.hpp"
#include "hipnav/simulation.hpp"
#include "support.hpp"

using namespace hipnav;
using hipnav::testing::code_of;
using hipnav::testing::random_transform;

namespace {

Phantom test_phantom() {
  Phantom ph;
  ph.base_to_cam = RigidTransform::from_axis_angle({0.2, 0.3, 0.93}, 35.0, {120, -80, 600}, FrameTag::Base, FrameTag::Cam);
  ph.patient_to_cam = RigidTransform::from_axis_angle({1, 0.2, 0.1}, 12.0, {40, 60, 750}, FrameTag::Patient, FrameTag::Cam);
  ph.bodies.push_back({"patient", FrameTag::Patient, {{0, 0, 0}, {60, 0, 0}, {0, 90, 0}, {20, 35, 50}}, 5.0});
  ph.bodies.push_back({"tool", FrameTag::Tool, {{0, 0, 0}, {50, 0, 0}, {0, 70, 0}, {15, 25, 40}}, 5.0});
  return ph;
}

TrackerModel wide_tracker(double sigma, std::uint64_t seed) {
  TrackerModel m;
  m.noise_sigma = sigma;
  m.fov = {Point3::Constant(-5000), Point3::Constant(5000)};
  m.seed = seed;
  return m;
}

}  // namespace

TEST(DeriveSeed, StableAndNameSensitive) {
  EXPECT_EQ(derive_seed(42, "tracker"), derive_seed(42, "tracker"));
  EXPECT_NE(derive_seed(42, "tracker"), derive_seed(42, "robot"));
  EXPECT_NE(derive_seed(42, "tracker"), derive_seed(43, "tracker"));
}

TEST(Tracker, NoiselessInViewIsExact) {
  OpticalTracker t(wide_tracker(0.0, 1));
  const auto m = tracker_measure(t, {1, 2, 3});
  ASSERT_TRUE(m);
  EXPECT_EQ(*m, Point3(1, 2, 3));
}

TEST(Tracker, OutOfViewConsumesNoDraw) {
  TrackerModel model = wide_tracker(0.1, 7);
  model.fov = {Point3::Constant(-10), Point3::Constant(10)};
  OpticalTracker a(model);
  OpticalTracker b(model);
  EXPECT_FALSE(a.measure({100, 0, 0}));
  EXPECT_EQ(*a.measure({1, 1, 1}), *b.measure({1, 1, 1}));
}

TEST(Tracker, NoiseStatistics) {
  OpticalTracker t(wide_tracker(0.1, 99));
  const Point3 truth(10, -20, 30);
  const int n = 10000;
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  Eigen::Vector3d sum_sq = Eigen::Vector3d::Zero();
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d d = *t.measure(truth) - truth;
    sum += d;
    sum_sq += d.cwiseProduct(d);
  }
  const Eigen::Vector3d mean = sum / n;
  for (int k = 0; k < 3; ++k) {
    EXPECT_LT(std::abs(mean[k]), 0.01);
    const double sd = std::sqrt(sum_sq[k] / n - mean[k] * mean[k]);
    EXPECT_NEAR(sd, 0.1, 0.01);
  }
}

TEST(Tracker, ErrorScalesLinearlyWithSigma) {
  const Point3 truth(5, 5, 5);
  auto mean_error = [&](double sigma) {
    OpticalTracker t(wide_tracker(sigma, 5));
    double s = 0.0;
    for (int i = 0; i < 5000; ++i) s += (*t.measure(truth) - truth).norm();
    return s / 5000.0;
  };
  EXPECT_EQ(mean_error(0.0), 0.0);
  const double e1 = mean_error(0.1);
  // Same seed, so the draws are identical and only the scale changes.
  EXPECT_NEAR(mean_error(0.2) / e1, 2.0, 1e-9);
  EXPECT_NEAR(mean_error(0.4) / e1, 4.0, 1e-9);
}

TEST(Tracker, RejectsNegativeSigma) {
  EXPECT_EQ(code_of([] { OpticalTracker(wide_tracker(-1.0, 0)); }), ErrorCode::InvalidArgument);
}

TEST(Robot, PerfectRobotReachesCommand) {
  std::mt19937_64 rng(50);
  SimulatedRobot robot(RobotModel{});
  for (int i = 0; i < 20; ++i) {
    const auto cmd = random_transform(rng, FrameTag::Tool, FrameTag::Base);
    const auto got = robot_move(robot, cmd);
    EXPECT_LT((got.matrix() - cmd.matrix()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Robot, TranslationBiasAlongToolX) {
  std::mt19937_64 rng(51);
  RobotModel m;
  m.pose_bias = RigidTransform::from_translation({1, 0, 0}, FrameTag::Tool, FrameTag::Tool);
  SimulatedRobot robot(m);
  const auto cmd = random_transform(rng, FrameTag::Tool, FrameTag::Base);
  const auto got = robot.move(cmd);
  const Eigen::Vector3d offset = got.translation() - cmd.translation();
  EXPECT_NEAR(offset.norm(), 1.0, 1e-12);
  EXPECT_LT((offset - cmd.rotation().col(0)).norm(), 1e-12);
}

TEST(Robot, ReplayIsIdentical) {
  std::mt19937_64 rng(52);
  std::vector<RigidTransform> cmds;
  for (int i = 0; i < 30; ++i) cmds.push_back(random_transform(rng, FrameTag::Tool, FrameTag::Base));
  RobotModel m;
  m.jitter_sigma_trans = 0.3;
  m.jitter_sigma_rot = 0.2;
  m.seed = 1234;
  SimulatedRobot a(m);
  SimulatedRobot b(m);
  for (const auto& c : cmds) EXPECT_EQ(a.move(c).matrix(), b.move(c).matrix());
}

TEST(Robot, OrientToolAddsAngleBias) {
  RobotModel m;
  m.angle_bias = {1.79, 0.99};
  SimulatedRobot robot(m);
  const auto pose = robot.orient_tool({40, 15}, {0, 0, 60}, FrameTag::Patient);
  const auto a = angles_from_axis(UnitVec3::normalized(pose.rotation().col(2)));
  EXPECT_NEAR(a.abduction, 41.79, 1e-9);
  EXPECT_NEAR(a.anteversion, 15.99, 1e-9);
  EXPECT_EQ(pose.translation(), Point3(0, 0, 60));
}

TEST(Robot, PoseBiasMustBeToolToTool) {
  RobotModel m;
  m.pose_bias = RigidTransform::identity(FrameTag::Tool, FrameTag::Base);
  EXPECT_EQ(code_of([&] { SimulatedRobot{m}; }), ErrorCode::FrameMismatch);
}

TEST(CalibrationDance, NoiselessRecoversGroundTruth) {
  const Phantom ph = test_phantom();
  SimulatedRobot robot(RobotModel{});
  OpticalTracker tracker(wide_tracker(0.0, 0));
  const auto start = RigidTransform::from_translation({18, 164, 32}, FrameTag::Tool, FrameTag::Base);
  const auto pairs = calibration_dance(robot, tracker, ph, start, 20.0, {3, 3, 3});
  EXPECT_EQ(pairs.size(), 27u);
  const auto res = register_filtered(pairs);
  EXPECT_LT(rotation_distance(res.transform.rotation(), ph.base_to_cam.rotation()), 1e-9);
  EXPECT_LT((res.transform.translation() - ph.base_to_cam.translation()).norm(), 1e-9);
}

TEST(CalibrationDance, OutOfViewSamplesDropped) {
  Phantom ph;  // identity base_to_cam
  SimulatedRobot robot(RobotModel{});
  TrackerModel tm = wide_tracker(0.0, 0);
  tm.fov = {Point3(-1000, -1000, -1000), Point3(30, 1000, 1000)};
  OpticalTracker tracker(tm);
  const auto start = RigidTransform::from_translation({0, 0, 0}, FrameTag::Tool, FrameTag::Base);
  // x offsets 0, 20, 40, 60: only the first two columns are in view.
  const auto pairs = calibration_dance(robot, tracker, ph, start, 20.0, {4, 3, 3});
  EXPECT_EQ(pairs.size(), 18u);
  for (const auto& q : pairs.q) EXPECT_LE(q.x(), 30.0);
}

TEST(CalibrationDance, SinglePoseIsInsufficient) {
  SimulatedRobot robot(RobotModel{});
  OpticalTracker tracker(wide_tracker(0.0, 0));
  const auto start = RigidTransform::identity(FrameTag::Tool, FrameTag::Base);
  EXPECT_EQ(code_of([&] { calibration_dance(robot, tracker, Phantom{}, start, 20.0, {1, 1, 1}); }),
            ErrorCode::InsufficientPairs);
}

TEST(SynthCtMarkers, FourBallsFourClusters) {
  const Phantom ph = test_phantom();
  const auto pic_pose = RigidTransform::from_axis_angle({0, 0, 1}, 10.0, {-100, 50, 20}, FrameTag::Patient, FrameTag::Pic);
  const auto cloud = synth_ct_markers(ph, "patient", 200, pic_pose, 77);
  EXPECT_EQ(cloud.size(), 800u);
  EXPECT_EQ(cloud.frame, FrameTag::Pic);
  const auto clusters = euclidean_cluster(KdTree(cloud), 5.0);
  ASSERT_EQ(clusters.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) {
    std::vector<Point3> pts;
    for (auto i : clusters[k]) pts.push_back(cloud.points[i]);
    const auto fit = fit_sphere(pts);
    EXPECT_NEAR(fit.sphere.radius, 5.0, 1e-6);
    EXPECT_LT((fit.sphere.center - apply(pic_pose, ph.bodies[0].balls[k])).norm(), 1e-6);
  }
}

TEST(SynthCtMarkers, IdentityPoseKeepsBodyCoordinates) {
  const Phantom ph = test_phantom();
  const auto cloud = synth_ct_markers(ph, "patient", 50, RigidTransform::identity(FrameTag::Patient, FrameTag::Pic), 1);
  for (std::size_t k = 0; k < 4; ++k) {
    const std::vector<Point3> pts(cloud.points.begin() + static_cast<long>(k * 50),
                                  cloud.points.begin() + static_cast<long>((k + 1) * 50));
    EXPECT_LT((fit_sphere(pts).sphere.center - ph.bodies[0].balls[k]).norm(), 1e-9);
  }
}

TEST(SynthCtMarkers, Errors) {
  const Phantom ph = test_phantom();
  const auto id = RigidTransform::identity(FrameTag::Patient, FrameTag::Pic);
  EXPECT_EQ(code_of([&] { synth_ct_markers(ph, "nobody", 200, id, 0); }), ErrorCode::UnknownBody);
  EXPECT_EQ(code_of([&] { synth_ct_markers(ph, "patient", 5, id, 0); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { synth_ct_markers(ph, "tool", 200, id, 0); }), ErrorCode::FrameMismatch);
}

TEST(MarkerBody, CollinearBallsRejected) {
  MarkerBody b{"line", FrameTag::Patient, {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}, 5.0};
  EXPECT_EQ(code_of([&] { b.validate(); }), ErrorCode::DegenerateConfiguration);
}
