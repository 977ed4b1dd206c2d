#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "hipnav/effector.hpp"
#include "support.hpp"

using namespace hipnav;
using hipnav::testing::code_of;

namespace {

std::vector<PressureSample> constant(double force, std::size_t n) {
  std::vector<PressureSample> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({static_cast<std::int64_t>(i), force});
  return out;
}

std::vector<PressureSample> random_profile(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double peak = 40.0 * u(rng);
  std::vector<PressureSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    double f = peak * u(rng);
    if (u(rng) < 0.7) f *= 0.5;
    out.push_back({static_cast<std::int64_t>(i), f});
  }
  return out;
}

std::int64_t stop_or_inf(const GrindLog& log) {
  return log.stop_tick.value_or(std::numeric_limits<std::int64_t>::max());
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(GrindController, RampStopsAtFirstCrossing) {
  std::vector<PressureSample> ramp;
  for (int i = 0; i < 100; ++i) ramp.push_back({i, 30.0 * i / 57.0});
  const auto log = run_profile(ControllerConfig{}, ramp);
  EXPECT_EQ(log.terminal_state, GrindState::EmergencyStopped);
  ASSERT_TRUE(log.stop_tick);
  EXPECT_EQ(*log.stop_tick, 57);
  EXPECT_EQ(log.entries.back().tick, 57);
}

TEST(GrindController, NoContactKeepsAdvancing) {
  GrindController c(ControllerConfig{});
  c.start();
  for (int i = 0; i < 500; ++i) {
    const auto out = c.step({i, 0.0});
    EXPECT_EQ(out.state, GrindState::Advancing);
    EXPECT_TRUE(out.actions.stepper_advanced);
    EXPECT_FALSE(out.actions.motor_running);
  }
  EXPECT_NEAR(c.depth(), 5.0, 1e-9);
  EXPECT_EQ(c.grind_depth(), 0.0);
}

TEST(GrindController, SteadyForceCompletesAtTickForty) {
  ControllerConfig cfg;
  cfg.target_depth = cfg.feed_per_tick * 40;
  const auto log = run_profile(cfg, constant(10.0, 100));
  EXPECT_EQ(log.terminal_state, GrindState::Complete);
  EXPECT_EQ(log.stop_tick, 40);
}

TEST(GrindController, ContactAboveSafetyStopsSameTick) {
  const auto log = run_profile(ControllerConfig{}, constant(35.0, 10));
  EXPECT_EQ(log.terminal_state, GrindState::EmergencyStopped);
  EXPECT_EQ(log.stop_tick, 0);
}

TEST(GrindController, ExactlyThresholdStops) {
  auto p = constant(5.0, 30);
  p[12].force = 30.0;
  EXPECT_EQ(run_profile(ControllerConfig{}, p).stop_tick, 12);
  p[12].force = std::nextafter(30.0, 0.0);
  EXPECT_EQ(run_profile(ControllerConfig{}, p).terminal_state, GrindState::Grinding);
}

TEST(GrindController, EmptyProfileSingleIdleEntry) {
  const auto log = run_profile(ControllerConfig{}, {});
  ASSERT_EQ(log.entries.size(), 1u);
  EXPECT_EQ(log.entries[0].state, GrindState::Idle);
  EXPECT_EQ(log.entries[0].tick, -1);
  EXPECT_EQ(log.terminal_state, GrindState::Idle);
  EXPECT_FALSE(log.stop_tick);
}

TEST(GrindController, IdleIgnoresSamples) {
  GrindController c(ControllerConfig{});
  EXPECT_EQ(c.step({0, 50.0}).state, GrindState::Idle);
  EXPECT_EQ(c.depth(), 0.0);
}

TEST(GrindController, TerminalRejectsSamples) {
  GrindController c(ControllerConfig{});
  c.start();
  c.step({0, 31.0});
  EXPECT_EQ(c.state(), GrindState::EmergencyStopped);
  EXPECT_EQ(code_of([&] { c.step({1, 0.0}); }), ErrorCode::TransitionFromTerminal);
  EXPECT_EQ(code_of([&] { c.start(); }), ErrorCode::TransitionFromTerminal);
}

TEST(GrindController, OutOfOrderSampleRejected) {
  GrindController c(ControllerConfig{});
  c.start();
  c.step({0, 0.0});
  EXPECT_EQ(code_of([&] { c.step({2, 0.0}); }), ErrorCode::OutOfOrderSample);
  EXPECT_EQ(code_of([&] { c.step({1, -1.0}); }), ErrorCode::InvalidArgument);
}

TEST(GrindController, ResetFromEmergencyStop) {
  GrindController c(ControllerConfig{});
  c.start();
  c.step({0, 1.0});
  EXPECT_EQ(c.state(), GrindState::Grinding);
  EXPECT_EQ(code_of([&] { reset(c); }), ErrorCode::IllegalReset);
  c.step({1, 40.0});
  EXPECT_EQ(reset(c), GrindState::Idle);
  EXPECT_EQ(c.depth(), 0.0);
}

TEST(GrindController, ResetThenReplayIsIdentical) {
  std::mt19937_64 rng(70);
  const auto profile = random_profile(rng, 300);
  GrindController c(ControllerConfig{});
  const auto first = run_profile(c, profile);
  if (is_terminal(c.state())) c.reset();
  const auto second = run_profile(c, profile);
  ASSERT_EQ(first.entries.size(), second.entries.size());
  for (std::size_t i = 0; i < first.entries.size(); ++i) {
    EXPECT_EQ(first.entries[i].tick, second.entries[i].tick);
    EXPECT_EQ(first.entries[i].state, second.entries[i].state);
    EXPECT_EQ(first.entries[i].depth, second.entries[i].depth);
  }
}

TEST(GrindController, SafetyLatencyMatchesScanOracle) {
  std::mt19937_64 rng(71);
  const ControllerConfig cfg;
  for (int k = 0; k < 1000; ++k) {
    const auto profile = random_profile(rng, 250);
    std::optional<std::int64_t> first;
    for (const auto& s : profile) {
      if (s.force >= cfg.pressure_threshold) {
        first = s.tick;
        break;
      }
    }
    const auto log = run_profile(cfg, profile);
    if (log.terminal_state == GrindState::EmergencyStopped) {
      ASSERT_TRUE(first);
      EXPECT_EQ(*log.stop_tick, *first);
    } else if (first) {
      // Only legitimate way to miss a crossing: the job finished before it.
      ASSERT_EQ(log.terminal_state, GrindState::Complete);
      EXPECT_LT(*log.stop_tick, *first);
    }
  }
}

TEST(GrindController, DepthNeverGrowsAfterTerminal) {
  std::mt19937_64 rng(72);
  for (int k = 0; k < 200; ++k) {
    const auto log = run_profile(ControllerConfig{}, random_profile(rng, 300));
    for (std::size_t i = 1; i < log.entries.size(); ++i) {
      EXPECT_GE(log.entries[i].depth, log.entries[i - 1].depth);
      if (is_terminal(log.entries[i - 1].state)) FAIL() << "entry after terminal state";
    }
  }
}

TEST(GrindController, LowerThresholdNeverDelaysStop) {
  std::mt19937_64 rng(73);
  for (int k = 0; k < 300; ++k) {
    const auto profile = random_profile(rng, 300);
    std::int64_t prev = -1;
    for (double thr : {5.0, 10.0, 20.0, 30.0, 40.0}) {
      ControllerConfig cfg;
      cfg.pressure_threshold = thr;
      const std::int64_t stop = stop_or_inf(run_profile(cfg, profile));
      EXPECT_GE(stop, prev) << "threshold " << thr;
      prev = stop;
    }
  }
}

TEST(GrindController, ConfigValidation) {
  ControllerConfig cfg;
  cfg.contact_threshold = 40.0;
  EXPECT_EQ(code_of([&] { GrindController{cfg}; }), ErrorCode::InvalidArgument);
  cfg = {};
  cfg.feed_per_tick = 0.0;
  EXPECT_EQ(code_of([&] { GrindController{cfg}; }), ErrorCode::InvalidArgument);
}

TEST(ContactModel, CartilageCompletesBoneStops) {
  ContactModel cartilage;
  const auto a = run_profile(ControllerConfig{}, synthesize_profile(cartilage));
  EXPECT_EQ(a.terminal_state, GrindState::Complete);

  ContactModel bone;
  bone.saturation = 25.0;
  bone.spike = ContactModel::Spike{120, 3, 31.0};
  const auto b = run_profile(ControllerConfig{}, synthesize_profile(bone));
  EXPECT_EQ(b.terminal_state, GrindState::EmergencyStopped);
  EXPECT_EQ(b.stop_tick, 120);
}

TEST(PressureCsv, RoundTripAndBadHeader) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto path = dir / "hipnav_pressure.csv";
  std::mt19937_64 rng(74);
  const auto profile = random_profile(rng, 50);
  write_pressure_csv(path, profile);
  const auto back = read_pressure_csv(path);
  ASSERT_EQ(back.size(), profile.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].tick, profile[i].tick);
    EXPECT_NEAR(back[i].force, profile[i].force, 1e-6);
  }
  std::ofstream(path) << "t,f\n0,1\n";
  EXPECT_EQ(code_of([&] { read_pressure_csv(path); }), ErrorCode::Io);
  std::filesystem::remove(path);
}

TEST(GrindLogCsv, HeaderAndRows) {
  const auto path = std::filesystem::temp_directory_path() / "hipnav_grind_log.csv";
  write_grind_log_csv(path, run_profile(ControllerConfig{}, constant(31.0, 3)));
  EXPECT_EQ(slurp(path),
            "tick,state,depth_mm,force_N\n"
            "-1,Idle,0.000000,0.000000\n"
            "0,EmergencyStopped,0.000000,31.000000\n");
  std::filesystem::remove(path);
}
