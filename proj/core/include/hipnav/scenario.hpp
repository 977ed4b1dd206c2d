#pragma once

// Declarative experiment description. One JSON file describes the phantom,
// the simulated devices, which experiments to run and the bounds the results
// must meet. See docs/scenario-schema.md for the field reference.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hipnav/effector.hpp"
#include "hipnav/navigation.hpp"
#include "hipnav/simulation.hpp"

namespace hipnav {

struct PositioningTest {
  GridSize grid;
  double step = 20.0;
  RigidTransform start = RigidTransform::identity(FrameTag::Tool, FrameTag::Base);
  double beta = 2.0;
  std::size_t max_rounds = 10;
  std::string patient_body = "patient";
  std::size_t points_per_ball = 200;
  double link_radius = 5.0;
  RigidTransform pic_pose = RigidTransform::identity(FrameTag::Patient, FrameTag::Pic);
  std::vector<Point3> targets;  ///< planned points in Pic
};

struct AlignmentTest {
  AnglePair desired{40.0, 15.0};
  AlignmentOptions options;
};

struct PressureProfile {
  std::string name;
  std::vector<PressureSample> samples;
  std::optional<GrindState> expect;
};

struct EffectorTest {
  ControllerConfig controller;
  std::vector<PressureProfile> profiles;
  std::size_t random_profiles = 0;  ///< extra seeded profiles checked against a scan
  std::size_t random_length = 200;
};

struct HeadSetup {
  ProsthesisHead head;
  double center_height = 0.0;  ///< true rotation-centre height above the osteotomy plane, mm
};

struct MeasurementTest {
  std::vector<HeadSetup> heads;
  double planned_e0 = 34.0;
  double planned_radius = 29.0;
  std::vector<double> limb_shifts{0.0, 5.0, 10.0};
};

/// Requirement on one summary statistic.
struct Bound {
  std::string test;
  std::string name;
  std::string variation;
  std::string stat = "mean";  ///< mean | sd | max
  std::optional<double> min;
  std::optional<double> max;
  std::optional<double> reference;  ///< reported alongside, never enforced
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  std::size_t repeats = 1;
  std::vector<std::string> tests;
  Phantom phantom;
  TrackerModel tracker;
  RobotModel robot;
  std::optional<PositioningTest> test1;
  std::optional<AlignmentTest> test2;
  std::optional<EffectorTest> test3;
  std::optional<MeasurementTest> test4;
  std::vector<Bound> bounds;
};

/// Names accepted in "tests", with a one-line description each.
struct TestInfo {
  std::string_view name;
  std::string_view description;
};
const std::vector<TestInfo>& available_tests();

/// Parses and fully validates a scenario; pressure-profile CSVs are resolved
/// relative to `base_dir`. Throws ConfigParse with the offending field path.
Scenario parse_scenario(std::string_view json_text, const std::filesystem::path& base_dir = {},
                        std::string_view source_name = "<scenario>");
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace hipnav
