#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "hipnav/report.hpp"
#include "hipnav/scenario.hpp"

namespace hipnav {

struct RunOptions {
  std::optional<std::uint64_t> seed_override;
  std::optional<std::size_t> repeats_override;
};

/// Executes every listed test for every repeat. Device seeds are derived from
/// (scenario seed, test, repeat, device), so the report is a pure function of
/// the scenario. Module errors are rethrown with the scenario/test/repeat prefixed.
Report run_scenario(const Scenario& scenario, const RunOptions& options = {});

/// load_scenario + run_scenario.
Report run_scenario(const std::filesystem::path& path, const RunOptions& options = {});

}  // namespace hipnav
