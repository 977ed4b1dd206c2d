#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hipnav/effector.hpp"
#include "hipnav/scenario.hpp"

namespace hipnav {

/// One raw measurement. (test, name, variation) identifies the metric.
struct RawRow {
  std::string test;
  std::size_t repeat = 0;
  std::string name;
  std::string variation;
  double value = 0.0;
};

/// Statistics of one metric over its raw rows. sd is the sample standard
/// deviation (n - 1), zero for a single row.
struct SummaryRow {
  std::string test;
  std::string name;
  std::string variation;
  std::size_t group = 0;
  double mean = 0.0;
  double sd = 0.0;
  double max = 0.0;
};

struct CheckResult {
  Bound bound;
  std::optional<double> observed;  ///< empty when the metric was never produced
  bool pass = false;
};

struct Report {
  std::string scenario;
  std::uint64_t seed = 0;
  std::size_t repeats = 0;
  std::vector<RawRow> rows;
  std::vector<SummaryRow> summary;
  std::vector<CheckResult> checks;
  std::vector<std::pair<std::string, GrindLog>> grind_logs;
  std::vector<std::string> notes;  ///< free-form lines, e.g. reference comparisons

  bool passed() const noexcept;
};

/// Summary rows in order of first appearance of each metric.
std::vector<SummaryRow> summarize(const std::vector<RawRow>& rows);

std::vector<CheckResult> evaluate_bounds(const std::vector<Bound>& bounds, const std::vector<SummaryRow>& summary);

enum class ReportFormat { Csv, StructuredText };

/// Csv writes <scenario>_raw.csv, <scenario>_summary.csv and one
/// <scenario>_grind_<profile>.csv per attached log; StructuredText writes
/// <scenario>_report.txt. Floats use six decimals. Returns the files written.
std::vector<std::filesystem::path> emit_report(const Report& report, ReportFormat format,
                                               const std::filesystem::path& out_dir);

std::string raw_csv(const Report& report);
std::string summary_csv(const Report& report);
std::string structured_text(const Report& report);

/// Parses the text produced by summary_csv.
std::vector<SummaryRow> parse_summary_csv(const std::string& text);
/// Parses the text produced by raw_csv.
std::vector<RawRow> parse_raw_csv(const std::string& text);

}  // namespace hipnav
