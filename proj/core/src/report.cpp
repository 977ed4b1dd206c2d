#include "hipnav/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace hipnav {
namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  // Avoid "-0.000000" so tiny negative noise does not change the bytes.
  if (std::string_view(buf) == "-0.000000") return "0.000000";
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

double parse_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::Io, "line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
}

std::string bound_label(const Bound& b) {
  std::string label = b.test + "/" + b.name;
  if (!b.variation.empty()) label += "/" + b.variation;
  return label + " " + b.stat;
}

}  // namespace

bool Report::passed() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

std::vector<SummaryRow> summarize(const std::vector<RawRow>& rows) {
  using Key = std::tuple<std::string, std::string, std::string>;
  std::vector<Key> order;
  std::map<Key, std::vector<double>> values;
  for (const auto& r : rows) {
    Key key{r.test, r.name, r.variation};
    auto [it, inserted] = values.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(r.value);
  }

  std::vector<SummaryRow> out;
  out.reserve(order.size());
  for (const auto& key : order) {
    const auto& v = values[key];
    SummaryRow s{std::get<0>(key), std::get<1>(key), std::get<2>(key), v.size()};
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    s.max = *std::max_element(v.begin(), v.end());
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<CheckResult> evaluate_bounds(const std::vector<Bound>& bounds, const std::vector<SummaryRow>& summary) {
  std::vector<CheckResult> out;
  for (const auto& b : bounds) {
    CheckResult c{b, std::nullopt, false};
    const auto it = std::find_if(summary.begin(), summary.end(), [&](const SummaryRow& s) {
      return s.test == b.test && s.name == b.name && s.variation == b.variation;
    });
    if (it != summary.end()) {
      const double v = b.stat == "sd" ? it->sd : b.stat == "max" ? it->max : it->mean;
      c.observed = v;
      c.pass = (!b.min || v >= *b.min) && (!b.max || v <= *b.max);
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::string raw_csv(const Report& report) {
  std::string out = "test,repeat,name,variation,value\n";
  for (const auto& r : report.rows) {
    out += csv_field(r.test) + "," + std::to_string(r.repeat) + "," + csv_field(r.name) + "," +
           csv_field(r.variation) + "," + fixed6(r.value) + "\n";
  }
  return out;
}

std::string summary_csv(const Report& report) {
  std::string out = "test,name,variation,group,mean,sd,max\n";
  for (const auto& s : report.summary) {
    out += csv_field(s.test) + "," + csv_field(s.name) + "," + csv_field(s.variation) + "," +
           std::to_string(s.group) + "," + fixed6(s.mean) + "," + fixed6(s.sd) + "," + fixed6(s.max) + "\n";
  }
  return out;
}

std::string structured_text(const Report& report) {
  std::ostringstream out;
  out << "[scenario]\n";
  out << "name = " << report.scenario << "\n";
  out << "seed = " << report.seed << "\n";
  out << "repeats = " << report.repeats << "\n";
  out << "result = " << (report.passed() ? "pass" : "fail") << "\n";
  out << "\n[summary]\n";
  for (const auto& s : report.summary) {
    out << s.test << "/" << s.name;
    if (!s.variation.empty()) out << "/" << s.variation;
    out << " : n = " << s.group << ", mean = " << fixed6(s.mean) << ", sd = " << fixed6(s.sd)
        << ", max = " << fixed6(s.max) << "\n";
  }
  out << "\n[checks]\n";
  for (const auto& c : report.checks) {
    out << (c.pass ? "PASS " : "FAIL ") << bound_label(c.bound) << " = "
        << (c.observed ? fixed6(*c.observed) : std::string("missing"));
    if (c.bound.min) out << ", min " << fixed6(*c.bound.min);
    if (c.bound.max) out << ", max " << fixed6(*c.bound.max);
    if (c.bound.reference) out << ", reference " << fixed6(*c.bound.reference);
    out << "\n";
  }
  if (!report.notes.empty()) {
    out << "\n[notes]\n";
    for (const auto& n : report.notes) out << n << "\n";
  }
  return out.str();
}

std::vector<std::filesystem::path> emit_report(const Report& report, ReportFormat format,
                                               const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + out_dir.string() + "': " + ec.message());

  std::vector<std::filesystem::path> written;
  if (format == ReportFormat::Csv) {
    written.push_back(out_dir / (report.scenario + "_raw.csv"));
    write_file(written.back(), raw_csv(report));
    written.push_back(out_dir / (report.scenario + "_summary.csv"));
    write_file(written.back(), summary_csv(report));
    for (const auto& [name, log] : report.grind_logs) {
      written.push_back(out_dir / (report.scenario + "_grind_" + name + ".csv"));
      write_grind_log_csv(written.back(), log);
    }
  } else {
    written.push_back(out_dir / (report.scenario + "_report.txt"));
    write_file(written.back(), structured_text(report));
  }
  return written;
}

std::vector<SummaryRow> parse_summary_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<SummaryRow> out;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7) throw Error(ErrorCode::Io, "summary line " + std::to_string(line_no) + ": expected 7 fields");
    out.push_back({f[0], f[1], f[2], static_cast<std::size_t>(parse_double(f[3], line_no)),
                   parse_double(f[4], line_no), parse_double(f[5], line_no), parse_double(f[6], line_no)});
  }
  return out;
}

std::vector<RawRow> parse_raw_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<RawRow> out;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 5) throw Error(ErrorCode::Io, "raw line " + std::to_string(line_no) + ": expected 5 fields");
    out.push_back({f[0], static_cast<std::size_t>(parse_double(f[1], line_no)), f[2], f[3], parse_double(f[4], line_no)});
  }
  return out;
}

}  // namespace hipnav
