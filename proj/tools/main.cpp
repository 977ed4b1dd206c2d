// hipnav: run, validate and list simulated THA navigation experiments.
#include <cstdio>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hipnav/errors.hpp"
#include "hipnav/report.hpp"
#include "hipnav/runner.hpp"
#include "hipnav/scenario.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitBoundViolated = 1;
constexpr int kExitError = 2;

struct Outcome {
  int code = kExitPass;
  std::string text;
};

Outcome run_one(const std::string& path, const hipnav::RunOptions& options, const std::string& out_dir) {
  Outcome o;
  try {
    const hipnav::Report report = hipnav::run_scenario(std::filesystem::path(path), options);
    std::vector<std::filesystem::path> files = hipnav::emit_report(report, hipnav::ReportFormat::Csv, out_dir);
    for (const auto& f : hipnav::emit_report(report, hipnav::ReportFormat::StructuredText, out_dir)) files.push_back(f);

    std::size_t failed = 0;
    for (const auto& c : report.checks) failed += c.pass ? 0 : 1;
    o.text = report.scenario + ": " + (report.passed() ? "pass" : "FAIL") + " (" +
             std::to_string(report.checks.size() - failed) + "/" + std::to_string(report.checks.size()) +
             " bounds)\n";
    for (const auto& n : report.notes) o.text += "  " + n + "\n";
    for (const auto& f : files) o.text += "  wrote " + f.string() + "\n";
    o.code = report.passed() ? kExitPass : kExitBoundViolated;
  } catch (const std::exception& e) {
    o.text = path + ": error: " + e.what() + "\n";
    o.code = kExitError;
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated image-guided hip arthroplasty experiments"};
  app.require_subcommand(1);

  std::vector<std::string> run_paths;
  std::string out_dir = "reports";
  std::uint64_t seed_override = 0;
  std::size_t repeats = 0;
  bool parallel = false;
  auto* run = app.add_subcommand("run", "Run one or more scenarios and write reports");
  run->add_option("scenario", run_paths, "Scenario JSON files")->required()->check(CLI::ExistingFile);
  run->add_option("--out-dir", out_dir, "Directory for report files")->capture_default_str();
  auto* seed_opt = run->add_option("--seed-override", seed_override, "Replace the scenario seed");
  auto* repeats_opt = run->add_option("--repeats", repeats, "Replace the repeat count")->check(CLI::PositiveNumber);
  run->add_flag("--parallel", parallel, "Run independent scenarios concurrently");

  std::vector<std::string> validate_paths;
  auto* validate = app.add_subcommand("validate", "Parse and validate scenarios without running them");
  validate->add_option("scenario", validate_paths, "Scenario JSON files")->required()->check(CLI::ExistingFile);

  auto* list = app.add_subcommand("list-tests", "List the experiments a scenario can request");

  CLI11_PARSE(app, argc, argv);

  if (*list) {
    for (const auto& t : hipnav::available_tests()) std::cout << t.name << "  " << t.description << "\n";
    return kExitPass;
  }

  if (*validate) {
    int code = kExitPass;
    for (const auto& p : validate_paths) {
      try {
        const hipnav::Scenario s = hipnav::load_scenario(p);
        std::cout << p << ": ok (" << s.name << ", " << s.tests.size() << " tests, " << s.repeats << " repeats)\n";
      } catch (const std::exception& e) {
        std::cerr << p << ": error: " << e.what() << "\n";
        code = kExitError;
      }
    }
    return code;
  }

  hipnav::RunOptions options;
  if (*seed_opt) options.seed_override = seed_override;
  if (*repeats_opt) options.repeats_override = repeats;

  // Validate everything first so a bad file never leaves a partial run behind.
  for (const auto& p : run_paths) {
    try {
      hipnav::load_scenario(p);
    } catch (const std::exception& e) {
      std::cerr << p << ": error: " << e.what() << "\n";
      return kExitError;
    }
  }

  std::vector<Outcome> outcomes;
  if (parallel && run_paths.size() > 1) {
    std::vector<std::future<Outcome>> jobs;
    for (const auto& p : run_paths) jobs.push_back(std::async(std::launch::async, run_one, p, options, out_dir));
    for (auto& j : jobs) outcomes.push_back(j.get());
  } else {
    for (const auto& p : run_paths) outcomes.push_back(run_one(p, options, out_dir));
  }

  int code = kExitPass;
  for (const auto& o : outcomes) {
    (o.code == kExitError ? std::cerr : std::cout) << o.text;
    code = std::max(code, o.code);
  }
  return code;
}
