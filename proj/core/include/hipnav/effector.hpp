#pragma once

// Reamer end-effector controller. One pressure sample per tick; the stepper
// advances the reamer, the grinding motor starts on contact, and the same tick
// that sees force at or above the safety threshold stops everything.
//
//   Idle -> Advancing -> Grinding -> {Complete, EmergencyStopped} -> Reset -> Idle

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "hipnav/errors.hpp"

namespace hipnav {

enum class GrindState { Idle, Advancing, Grinding, Complete, EmergencyStopped, Reset };

std::string_view to_string(GrindState s) noexcept;
bool is_terminal(GrindState s) noexcept;

struct ControllerConfig {
  double pressure_threshold = 30.0;  ///< N
  double contact_threshold = 0.5;    ///< N
  double feed_per_tick = 0.01;       ///< mm
  double target_depth = 2.0;         ///< mm of grinding after contact
  double tick_period_ms = 10.0;

  void validate() const;
};

struct PressureSample {
  std::int64_t tick = 0;
  double force = 0.0;  ///< N
};

struct StepActions {
  bool stepper_advanced = false;
  bool motor_running = false;
  bool emergency_stop = false;
};

struct StepOutcome {
  GrindState state = GrindState::Idle;
  StepActions actions;
};

class GrindController {
 public:
  explicit GrindController(ControllerConfig config);

  /// Idle -> Advancing. Throws TransitionFromTerminal from terminal states.
  void start();

  /// Ticks must arrive as 0, 1, 2, ... (restarting at 0 after reset).
  /// Throws OutOfOrderSample or TransitionFromTerminal.
  StepOutcome step(const PressureSample& sample);

  /// {Complete, EmergencyStopped} -> Reset -> Idle, zeroing depth and the
  /// tick counter. Throws IllegalReset from any other state.
  GrindState reset();

  GrindState state() const noexcept { return state_; }
  double depth() const noexcept;        ///< total stepper travel, mm
  double grind_depth() const noexcept;  ///< travel since contact, mm
  const ControllerConfig& config() const noexcept { return config_; }

 private:
  ControllerConfig config_;
  GrindState state_ = GrindState::Idle;
  std::int64_t next_tick_ = 0;
  std::int64_t approach_ticks_ = 0;
  std::int64_t grind_ticks_ = 0;
};

StepOutcome step(GrindController& controller, const PressureSample& sample);
GrindState reset(GrindController& controller);

struct GrindLogEntry {
  std::int64_t tick = -1;  ///< -1 for the state before the first sample
  GrindState state = GrindState::Idle;
  double depth = 0.0;
  double force = 0.0;
};

struct GrindLog {
  std::vector<GrindLogEntry> entries;
  GrindState terminal_state = GrindState::Idle;
  std::optional<std::int64_t> stop_tick;  ///< tick at which a terminal state was entered
};

/// Runs a fresh controller over the profile, starting it before the first
/// sample and stopping the fold at the first terminal state.
GrindLog run_profile(const ControllerConfig& config, const std::vector<PressureSample>& profile);

/// Replays a profile on an existing controller (which must be Idle).
GrindLog run_profile(GrindController& controller, const std::vector<PressureSample>& profile);

/// Synthetic contact model: the reamer closes `approach_mm` at feed_per_tick,
/// after which force rises with `stiffness` N/mm of interference up to
/// `saturation` N. An optional spike overrides the force on a tick window.
struct ContactModel {
  double approach_mm = 0.2;
  double stiffness = 40.0;
  double saturation = 12.0;
  double feed_per_tick = 0.01;
  std::size_t ticks = 300;
  struct Spike {
    std::int64_t tick = 0;
    std::int64_t width = 1;
    double force = 31.0;
  };
  std::optional<Spike> spike;
};

std::vector<PressureSample> synthesize_profile(const ContactModel& model);

/// CSV with header "tick,force_N".
std::vector<PressureSample> read_pressure_csv(const std::filesystem::path& path);
void write_pressure_csv(const std::filesystem::path& path, const std::vector<PressureSample>& profile);
/// CSV with header "tick,state,depth_mm,force_N", six decimals.
void write_grind_log_csv(const std::filesystem::path& path, const GrindLog& log);

}  // namespace hipnav
