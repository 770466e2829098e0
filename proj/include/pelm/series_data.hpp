#pragma once

// Hourly volume series: CSV ingest, synthetic generation, lag windowing and
// the +/- rho% target band used to train the two-output interval model.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pelm/error.hpp"
#include "pelm/random.hpp"
#include "pelm/text.hpp"

namespace pelm {

/// A wall-clock hour, stored as whole hours since 1970-01-01T00:00.
class HourStamp {
 public:
  constexpr HourStamp() = default;
  constexpr explicit HourStamp(std::int64_t hours) : hours_(hours) {}

  static HourStamp from_civil(int year, unsigned month, unsigned day, int hour) {
    using namespace std::chrono;
    const sys_days d{year_month_day{std::chrono::year{year}, std::chrono::month{month},
                                    std::chrono::day{day}}};
    return HourStamp(static_cast<std::int64_t>(d.time_since_epoch().count()) * 24 + hour);
  }

  /// Accepts `YYYY-MM-DDTHH:00`.
  static std::optional<HourStamp> parse(std::string_view s) {
    s = text::trim(s);
    if (s.size() != 16 || s[4] != '-' || s[7] != '-' || s[10] != 'T' ||
        s[13] != ':' || s.substr(14) != "00")
      return std::nullopt;
    const auto y = text::parse_int(s.substr(0, 4));
    const auto mo = text::parse_int(s.substr(5, 2));
    const auto d = text::parse_int(s.substr(8, 2));
    const auto h = text::parse_int(s.substr(11, 2));
    if (!y || !mo || !d || !h || *h < 0 || *h > 23) return std::nullopt;
    const std::chrono::year_month_day ymd{std::chrono::year{static_cast<int>(*y)},
                                          std::chrono::month{static_cast<unsigned>(*mo)},
                                          std::chrono::day{static_cast<unsigned>(*d)}};
    if (!ymd.ok()) return std::nullopt;
    return from_civil(static_cast<int>(*y), static_cast<unsigned>(*mo),
                      static_cast<unsigned>(*d), static_cast<int>(*h));
  }

  std::string str() const {
    using namespace std::chrono;
    const year_month_day ymd{sys_days{days{day_index()}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:00", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  hour_of_day());
    return buf;
  }

  std::int64_t hours() const { return hours_; }
  std::int64_t day_index() const {
    return hours_ >= 0 ? hours_ / 24 : -((-hours_ + 23) / 24);
  }
  int hour_of_day() const { return static_cast<int>(hours_ - day_index() * 24); }
  /// 0 = Sunday ... 6 = Saturday.
  unsigned weekday() const {
    return std::chrono::weekday{std::chrono::sys_days{std::chrono::days{day_index()}}}
        .c_encoding();
  }

  auto operator<=>(const HourStamp&) const = default;

 private:
  std::int64_t hours_ = 0;
};

/// Ordered hourly observations. Validated on construction, immutable after.
class TimeSeries {
 public:
  TimeSeries() = default;
  TimeSeries(std::vector<HourStamp> timestamps, std::vector<double> values)
      : timestamps_(std::move(timestamps)), values_(std::move(values)) {
    require(timestamps_.size() == values_.size(), ErrorKind::data,
            "timestamps and values differ in length");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      require(std::isfinite(values_[i]), ErrorKind::data,
              "non-finite volume at index " + std::to_string(i));
      require(values_[i] >= 0.0, ErrorKind::data,
              "negative volume at index " + std::to_string(i));
      if (i > 0)
        require(timestamps_[i - 1] < timestamps_[i], ErrorKind::data,
                "timestamps not strictly increasing at index " + std::to_string(i));
    }
  }

  const std::vector<HourStamp>& timestamps() const { return timestamps_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

 private:
  std::vector<HourStamp> timestamps_;
  std::vector<double> values_;
};

struct WindowConfig {
  std::size_t lag = 14;
  std::size_t horizon = 1;

  void validate() const {
    require(lag >= 1, ErrorKind::config, "lag must be >= 1");
    require(horizon >= 1, ErrorKind::config, "horizon must be >= 1");
  }
};

struct BandConfig {
  double rho_percent = 5.0;

  void validate() const {
    require(rho_percent > 0.0 && rho_percent < 100.0, ErrorKind::config,
            "rho_percent must lie in (0, 100)");
  }
};

/// Lagged features, point targets and the band targets around them.
struct SupervisedSet {
  Eigen::MatrixXd features;  // N x lag
  Eigen::VectorXd targets;
  Eigen::VectorXd band_lower;
  Eigen::VectorXd band_upper;
  /// Position of each target in the source series.
  std::vector<std::size_t> target_index;

  std::size_t size() const { return static_cast<std::size_t>(targets.size()); }
  std::size_t width() const { return static_cast<std::size_t>(features.cols()); }

  SupervisedSet rows(std::size_t begin, std::size_t count) const {
    const auto b = static_cast<Eigen::Index>(begin);
    const auto c = static_cast<Eigen::Index>(count);
    SupervisedSet out;
    out.features = features.middleRows(b, c);
    out.targets = targets.segment(b, c);
    out.band_lower = band_lower.segment(b, c);
    out.band_upper = band_upper.segment(b, c);
    out.target_index.assign(target_index.begin() + b, target_index.begin() + b + c);
    return out;
  }
};

struct SplitSpec {
  std::size_t train_len = 0;
  std::size_t test_len = 0;
};

// ---------------------------------------------------------------------------
// CSV

inline constexpr std::string_view kSeriesHeader = "timestamp,volume";

inline TimeSeries read_csv(std::istream& in, const std::string& name = "<stream>") {
  std::string line;
  std::size_t line_no = 0;
  auto where = [&] { return name + ":" + std::to_string(line_no) + ": "; };

  if (!std::getline(in, line)) fail(ErrorKind::data, name + ": empty file");
  ++line_no;
  if (text::trim(line) != kSeriesHeader)
    fail(ErrorKind::data, where() + "expected header '" + std::string(kSeriesHeader) + "'");

  std::vector<HourStamp> stamps;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty()) continue;
    const auto fields = text::split(body, ',');
    if (fields.size() != 2) fail(ErrorKind::data, where() + "expected 2 fields");
    const auto stamp = HourStamp::parse(fields[0]);
    if (!stamp) fail(ErrorKind::data, where() + "malformed timestamp");
    const auto volume = text::parse_double(fields[1]);
    if (!volume || !std::isfinite(*volume)) fail(ErrorKind::data, where() + "malformed volume");
    if (*volume < 0.0) fail(ErrorKind::data, where() + "negative volume");
    if (!stamps.empty() && !(stamps.back() < *stamp))
      fail(ErrorKind::data, where() + "non-monotone timestamp");
    stamps.push_back(*stamp);
    values.push_back(*volume);
  }
  if (values.empty()) fail(ErrorKind::data, name + ": no records");
  return TimeSeries(std::move(stamps), std::move(values));
}

inline TimeSeries load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::data, "cannot open '" + path + "'");
  return read_csv(in, path);
}

inline void write_csv(std::ostream& out, const TimeSeries& series) {
  out << kSeriesHeader << '\n';
  for (std::size_t i = 0; i < series.size(); ++i)
    out << series.timestamps()[i].str() << ',' << text::exact(series.values()[i]) << '\n';
}

inline void save_csv(const std::string& path, const TimeSeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::data, "cannot write '" + path + "'");
  write_csv(out, series);
  if (!out) fail(ErrorKind::data, "write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// Synthetic hourly traffic

inline constexpr int kFirstHour = 7;
inline constexpr int kLastHour = 21;
inline constexpr int kHoursPerDay = kLastHour - kFirstHour + 1;

/// Shape of the synthetic record: a diurnal hump over 07:00-21:00, a
/// weekend level shift, Gaussian noise and occasional signed spikes.
struct SynthProfile {
  double base_level = 450.0;
  double diurnal_amplitude = 0.6;
  double weekend_multiplier = 1.3;
  double noise_sd = 30.0;  // sd at base_level, scaled in proportion to the level
  double spike_probability = 0.02;
  double spike_magnitude = 120.0;
  int start_year = 2014;
  unsigned start_month = 1;
  unsigned start_day = 1;
};

/// Noise-free level at a given hour of a weekday or weekend day.
inline double synth_level(const SynthProfile& p, int hour, bool weekend) {
  const double phase = std::numbers::pi * (hour - kFirstHour) / (kHoursPerDay - 1);
  const double shape = std::sin(phase) - 0.5;
  return p.base_level * (1.0 + p.diurnal_amplitude * shape) *
         (weekend ? p.weekend_multiplier : 1.0);
}

inline TimeSeries synthesize(int days, std::uint64_t seed, const SynthProfile& profile = {}) {
  require(days >= 1, ErrorKind::config, "synthesize: days must be >= 1");
  Rng rng(seed);
  const auto start = HourStamp::from_civil(profile.start_year, profile.start_month,
                                           profile.start_day, 0);
  std::vector<HourStamp> stamps;
  std::vector<double> values;
  stamps.reserve(static_cast<std::size_t>(days) * kHoursPerDay);
  values.reserve(stamps.capacity());
  for (int d = 0; d < days; ++d) {
    for (int h = kFirstHour; h <= kLastHour; ++h) {
      const HourStamp stamp(start.hours() + std::int64_t{d} * 24 + h);
      const unsigned wd = stamp.weekday();
      const bool weekend = wd == 0 || wd == 6;
      const double level = synth_level(profile, h, weekend);
      double v = level + profile.noise_sd * (level / profile.base_level) * rng.normal();
      // Spike draws are consumed every hour so the stream layout is fixed.
      const double spike_u = rng.uniform01();
      const double spike_size = rng.uniform(0.5, 1.5);
      const double spike_sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
      if (spike_u < profile.spike_probability)
        v += spike_sign * spike_size * profile.spike_magnitude;
      stamps.push_back(stamp);
      values.push_back(std::max(v, 0.0));
    }
  }
  return TimeSeries(std::move(stamps), std::move(values));
}

// ---------------------------------------------------------------------------
// Windowing

inline SupervisedSet make_supervised(std::span<const double> values, const WindowConfig& w,
                                     const BandConfig& b) {
  w.validate();
  b.validate();
  require(values.size() > w.lag + w.horizon - 1, ErrorKind::data,
          "series too short for one window (length " + std::to_string(values.size()) +
              ", lag " + std::to_string(w.lag) + ", horizon " + std::to_string(w.horizon) + ")");
  const std::size_t n = values.size() - w.lag - w.horizon + 1;
  const double down = 1.0 - b.rho_percent / 100.0;
  const double up = 1.0 + b.rho_percent / 100.0;

  SupervisedSet ds;
  ds.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(w.lag));
  ds.targets.resize(static_cast<Eigen::Index>(n));
  ds.band_lower.resize(ds.targets.size());
  ds.band_upper.resize(ds.targets.size());
  ds.target_index.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < w.lag; ++j)
      ds.features(r, static_cast<Eigen::Index>(j)) = values[i + j];
    const std::size_t t = i + w.lag + w.horizon - 1;
    ds.targets(r) = values[t];
    ds.band_lower(r) = values[t] * down;
    ds.band_upper(r) = values[t] * up;
    ds.target_index[i] = t;
  }
  return ds;
}

inline SupervisedSet make_supervised(const TimeSeries& series, const WindowConfig& w,
                                     const BandConfig& b) {
  return make_supervised(std::span<const double>(series.values()), w, b);
}

/// Chronological split: the first train_len samples and the last test_len.
inline std::pair<SupervisedSet, SupervisedSet> split(const SupervisedSet& ds,
                                                     const SplitSpec& spec) {
  require(spec.train_len >= 1, ErrorKind::config, "split: train_len must be >= 1");
  require(spec.test_len >= 1, ErrorKind::config, "split: test_len must be >= 1");
  require(spec.train_len + spec.test_len <= ds.size(), ErrorKind::config,
          "split: train_len + test_len = " + std::to_string(spec.train_len + spec.test_len) +
              " exceeds " + std::to_string(ds.size()) + " samples");
  return {ds.rows(0, spec.train_len), ds.rows(ds.size() - spec.test_len, spec.test_len)};
}

}  // namespace pelm
