#include "hipnav/effector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace hipnav {

std::string_view to_string(GrindState s) noexcept {
  switch (s) {
    case GrindState::Idle: return "Idle";
    case GrindState::Advancing: return "Advancing";
    case GrindState::Grinding: return "Grinding";
    case GrindState::Complete: return "Complete";
    case GrindState::EmergencyStopped: return "EmergencyStopped";
    case GrindState::Reset: return "Reset";
  }
  return "?";
}

bool is_terminal(GrindState s) noexcept {
  return s == GrindState::Complete || s == GrindState::EmergencyStopped;
}

void ControllerConfig::validate() const {
  if (!(contact_threshold > 0.0) || !(contact_threshold < pressure_threshold)) {
    throw Error(ErrorCode::InvalidArgument, "need 0 < contact_threshold < pressure_threshold");
  }
  if (!(feed_per_tick > 0.0)) throw Error(ErrorCode::InvalidArgument, "feed_per_tick must be positive");
  if (!(target_depth > 0.0)) throw Error(ErrorCode::InvalidArgument, "target_depth must be positive");
  if (!(tick_period_ms > 0.0)) throw Error(ErrorCode::InvalidArgument, "tick_period_ms must be positive");
}

GrindController::GrindController(ControllerConfig config) : config_(config) { config_.validate(); }

double GrindController::depth() const noexcept {
  return static_cast<double>(approach_ticks_ + grind_ticks_) * config_.feed_per_tick;
}

double GrindController::grind_depth() const noexcept {
  return static_cast<double>(grind_ticks_) * config_.feed_per_tick;
}

void GrindController::start() {
  if (is_terminal(state_)) throw Error(ErrorCode::TransitionFromTerminal, "reset before starting again");
  if (state_ == GrindState::Idle) state_ = GrindState::Advancing;
}

StepOutcome GrindController::step(const PressureSample& sample) {
  if (is_terminal(state_)) {
    throw Error(ErrorCode::TransitionFromTerminal,
                "sample at tick " + std::to_string(sample.tick) + " after " + std::string(to_string(state_)));
  }
  if (sample.tick != next_tick_) {
    throw Error(ErrorCode::OutOfOrderSample,
                "expected tick " + std::to_string(next_tick_) + ", got " + std::to_string(sample.tick));
  }
  if (!(sample.force >= 0.0) || !std::isfinite(sample.force)) {
    throw Error(ErrorCode::InvalidArgument, "force must be finite and >= 0");
  }
  ++next_tick_;

  StepOutcome out;
  switch (state_) {
    case GrindState::Idle:
    case GrindState::Reset:
      break;
    case GrindState::Advancing:
      if (sample.force >= config_.contact_threshold) {
        state_ = GrindState::Grinding;
        if (sample.force >= config_.pressure_threshold) {
          state_ = GrindState::EmergencyStopped;
          out.actions.emergency_stop = true;
        } else {
          out.actions.motor_running = true;
        }
      } else {
        ++approach_ticks_;
        out.actions.stepper_advanced = true;
      }
      break;
    case GrindState::Grinding:
      if (sample.force >= config_.pressure_threshold) {
        state_ = GrindState::EmergencyStopped;
        out.actions.emergency_stop = true;
        break;
      }
      ++grind_ticks_;
      out.actions.stepper_advanced = true;
      out.actions.motor_running = true;
      if (grind_depth() >= config_.target_depth - 1e-9) {
        state_ = GrindState::Complete;
        out.actions.motor_running = false;
      }
      break;
    case GrindState::Complete:
    case GrindState::EmergencyStopped:
      break;  // unreachable, rejected above
  }
  out.state = state_;
  return out;
}

GrindState GrindController::reset() {
  if (!is_terminal(state_)) {
    throw Error(ErrorCode::IllegalReset, "cannot reset from " + std::string(to_string(state_)));
  }
  state_ = GrindState::Reset;
  approach_ticks_ = 0;
  grind_ticks_ = 0;
  next_tick_ = 0;
  state_ = GrindState::Idle;
  return state_;
}

StepOutcome step(GrindController& controller, const PressureSample& sample) { return controller.step(sample); }
GrindState reset(GrindController& controller) { return controller.reset(); }

GrindLog run_profile(GrindController& controller, const std::vector<PressureSample>& profile) {
  if (controller.state() != GrindState::Idle) {
    throw Error(ErrorCode::InvalidArgument, "run_profile needs an Idle controller");
  }
  GrindLog log;
  log.entries.push_back({-1, controller.state(), controller.depth(), 0.0});
  if (!profile.empty()) controller.start();
  for (const auto& sample : profile) {
    const StepOutcome out = controller.step(sample);
    log.entries.push_back({sample.tick, out.state, controller.depth(), sample.force});
    if (is_terminal(out.state)) {
      log.stop_tick = sample.tick;
      break;
    }
  }
  log.terminal_state = controller.state();
  return log;
}

GrindLog run_profile(const ControllerConfig& config, const std::vector<PressureSample>& profile) {
  GrindController controller(config);
  return run_profile(controller, profile);
}

std::vector<PressureSample> synthesize_profile(const ContactModel& model) {
  if (!(model.feed_per_tick > 0.0)) throw Error(ErrorCode::InvalidArgument, "feed_per_tick must be positive");
  std::vector<PressureSample> out;
  out.reserve(model.ticks);
  for (std::size_t t = 0; t < model.ticks; ++t) {
    const double travel = static_cast<double>(t) * model.feed_per_tick;
    const double interference = std::max(0.0, travel - model.approach_mm);
    double force = std::min(model.saturation, model.stiffness * interference);
    const auto tick = static_cast<std::int64_t>(t);
    if (model.spike && tick >= model.spike->tick && tick < model.spike->tick + model.spike->width) {
      force = model.spike->force;
    }
    out.push_back({tick, force});
  }
  return out;
}

std::vector<PressureSample> read_pressure_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::string line;
  std::size_t line_no = 0;
  std::vector<PressureSample> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("tick", 0) == 0) continue;
    std::istringstream fields(line);
    PressureSample s;
    char comma = 0;
    if (!(fields >> s.tick >> comma >> s.force) || comma != ',') {
      throw Error(ErrorCode::Io, path.string() + ":" + std::to_string(line_no) + ": expected 'tick,force_N'");
    }
    out.push_back(s);
  }
  return out;
}

void write_pressure_csv(const std::filesystem::path& path, const std::vector<PressureSample>& profile) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << "tick,force_N\n";
  char buf[64];
  for (const auto& s : profile) {
    std::snprintf(buf, sizeof buf, "%lld,%.6f\n", static_cast<long long>(s.tick), s.force);
    out << buf;
  }
}

void write_grind_log_csv(const std::filesystem::path& path, const GrindLog& log) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << "tick,state,depth_mm,force_N\n";
  char buf[128];
  for (const auto& e : log.entries) {
    std::snprintf(buf, sizeof buf, "%lld,%s,%.6f,%.6f\n", static_cast<long long>(e.tick),
                  std::string(to_string(e.state)).c_str(), e.depth, e.force);
    out << buf;
  }
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

}  // namespace hipnav
