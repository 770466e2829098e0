#pragma once

// Output formats: the results table, interval traces, swarm history and the
// outside-point summary. All text is UTF-8 with LF line endings.

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pelm/error.hpp"
#include "pelm/interval_metrics.hpp"
#include "pelm/pso.hpp"
#include "pelm/text.hpp"

namespace pelm {

inline constexpr int kReportDecimals = 6;
inline constexpr std::string_view kReportHeader =
    "model\tpinc\treliability\tsharpness\tobjective\tpicp\tmpil";
inline constexpr std::string_view kBoundsHeader = "index,lower,upper,actual,covered";
inline constexpr std::string_view kHistoryHeader = "iteration,objective,aace,sharpness";

/// One results-table line, already rounded to its printed precision.
struct ReportRow {
  std::string model;
  double pinc = 0.0;
  std::string reliability;
  std::string sharpness;
  std::string objective;
  std::string picp;
  std::string mpil;
};

/// The objective column is built from the printed reliability and sharpness
/// so that objective = gamma * reliability + lambda * sharpness holds on the
/// printed digits.
inline ReportRow make_report_row(const std::string& model, double pinc, const Evaluation& e,
                                 const ObjectiveWeights& ow, int decimals = kReportDecimals) {
  ReportRow r;
  r.model = model;
  r.pinc = pinc;
  r.reliability = text::fixed(e.aace, decimals);
  r.sharpness = text::fixed(e.sharpness, decimals);
  const double rel = *text::parse_double(r.reliability);
  const double sharp = *text::parse_double(r.sharpness);
  r.objective = text::fixed(objective(rel, sharp, ow), decimals);
  r.picp = text::fixed(e.picp, decimals);
  r.mpil = text::fixed(e.mpil, decimals);
  return r;
}

inline std::string pinc_text(double pinc) { return text::exact(pinc); }

/// 0.9 -> "90", 0.975 -> "97.5"; used in file names.
inline std::string pinc_label(double pinc) {
  std::string s = text::fixed(pinc * 100.0, 4);
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

inline std::string format_row(const ReportRow& r) {
  return r.model + '\t' + pinc_text(r.pinc) + '\t' + r.reliability + '\t' + r.sharpness + '\t' +
         r.objective + '\t' + r.picp + '\t' + r.mpil;
}

inline void write_report(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << kReportHeader << '\n';
  for (const auto& r : rows) out << format_row(r) << '\n';
}

inline nlohmann::json to_json(const Evaluation& e) {
  return {{"picp", e.picp},
          {"aace", e.aace},
          {"sharpness", e.sharpness},
          {"objective", e.objective},
          {"mpil", e.mpil}};
}

// ---------------------------------------------------------------------------
// Bounds traces

inline void write_bounds(std::ostream& out, const IntervalForecast& f) {
  out << kBoundsHeader << '\n';
  for (std::size_t i = 0; i < f.size(); ++i)
    out << i << ',' << text::exact(f.lower[i]) << ',' << text::exact(f.upper[i]) << ','
        << text::exact(f.actual[i]) << ',' << (covered(f.lower[i], f.upper[i], f.actual[i]) ? 1 : 0)
        << '\n';
}

/// Parses a bounds trace. The covered column must be 0/1; metrics are always
/// recomputed from the bounds.
inline IntervalForecast read_bounds(std::istream& in, PiConfig pi,
                                    const std::string& name = "<stream>") {
  std::string line;
  std::size_t line_no = 0;
  auto where = [&] { return name + ":" + std::to_string(line_no) + ": "; };
  if (!std::getline(in, line)) fail(ErrorKind::data, name + ": empty file");
  ++line_no;
  if (text::trim(line) != kBoundsHeader)
    fail(ErrorKind::data, where() + "expected header '" + std::string(kBoundsHeader) + "'");

  IntervalForecast f;
  f.pi = pi;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty()) continue;
    const auto fields = text::split(body, ',');
    if (fields.size() != 5) fail(ErrorKind::data, where() + "expected 5 fields");
    const auto index = text::parse_int(fields[0]);
    const auto lo = text::parse_double(fields[1]);
    const auto hi = text::parse_double(fields[2]);
    const auto actual = text::parse_double(fields[3]);
    const auto cov = text::parse_int(fields[4]);
    if (!index || !lo || !hi || !actual || !cov || (*cov != 0 && *cov != 1))
      fail(ErrorKind::data, where() + "malformed row");
    if (!std::isfinite(*lo) || !std::isfinite(*hi) || !std::isfinite(*actual))
      fail(ErrorKind::data, where() + "non-finite value");
    if (*lo > *hi)
      fail(ErrorKind::data, where() + "lower > upper at index " + std::to_string(*index));
    f.lower.push_back(*lo);
    f.upper.push_back(*hi);
    f.actual.push_back(*actual);
  }
  if (f.actual.empty()) fail(ErrorKind::data, name + ": no rows");
  return f;
}

// ---------------------------------------------------------------------------
// Swarm history and outside points

inline void write_history(std::ostream& out, const std::vector<HistoryEntry>& history) {
  out << kHistoryHeader << '\n';
  for (const auto& h : history)
    out << h.iteration << ',' << text::exact(h.value.objective) << ','
        << text::exact(h.value.aace) << ',' << text::exact(h.value.sharpness) << '\n';
}

inline void write_outside(std::ostream& out, const OutsideStats& s) {
  out << "relationship\tcount\tmean_distance\n";
  out << "above_upper\t" << s.above_count << '\t' << text::fixed(s.above_mean_dist, 2) << '\n';
  out << "below_lower\t" << s.below_count << '\t' << text::fixed(s.below_mean_dist, 2) << '\n';
}

/// Writes via a string buffer so a failed write never leaves a partial file
/// unreported.
template <class Writer>
void write_file(const std::string& path, Writer&& writer) {
  std::ostringstream buf;
  writer(buf);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::data, "cannot write '" + path + "'");
  out << buf.str();
  if (!out) fail(ErrorKind::data, "write failed for '" + path + "'");
}

}  // namespace pelm
