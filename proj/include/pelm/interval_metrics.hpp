#pragma once

// Prediction-interval quality: coverage (PICP), its error against the
// nominal level (AACE), width-plus-violation sharpness normalized over the
// scored set, mean interval length and the combined objective
//   F = gamma * AACE + lambda * mean(normalized sharpness).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pelm/error.hpp"

namespace pelm {

struct PiConfig {
  double alpha = 0.1;

  static PiConfig from_pinc(double pinc) { return PiConfig{1.0 - pinc}; }
  double pinc() const { return 1.0 - alpha; }
  void validate() const {
    require(alpha > 0.0 && alpha < 1.0, ErrorKind::config, "alpha must lie in (0, 1)");
  }
};

struct SharpnessWeights {
  double w1 = 1.0;
  double w2 = 0.0;

  void validate() const {
    require(w1 > 0.0, ErrorKind::config, "sharpness weight w1 must be > 0");
    require(w2 >= 0.0, ErrorKind::config, "sharpness weight w2 must be >= 0");
  }
};

struct ObjectiveWeights {
  double gamma = 1.0;
  double lambda = 1.0;

  void validate() const {
    require(gamma >= 0.0 && lambda >= 0.0, ErrorKind::config,
            "objective weights must be >= 0");
    require(gamma > 0.0 || lambda > 0.0, ErrorKind::config,
            "objective weights must not both be zero");
  }
};

/// Per-row prediction interval.
struct IntervalBounds {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t size() const { return lower.size(); }
};

/// Bounds paired with the realized targets they are scored against.
struct IntervalForecast {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> actual;
  PiConfig pi;

  std::size_t size() const { return actual.size(); }

  void validate() const {
    require(lower.size() == upper.size() && upper.size() == actual.size(), ErrorKind::data,
            "forecast: lower/upper/actual lengths differ");
    require(!actual.empty(), ErrorKind::data, "forecast: empty");
    pi.validate();
    for (std::size_t i = 0; i < actual.size(); ++i) {
      require(std::isfinite(lower[i]) && std::isfinite(upper[i]) && std::isfinite(actual[i]),
              ErrorKind::numeric, "forecast: non-finite value at index " + std::to_string(i));
      require(lower[i] <= upper[i], ErrorKind::data,
              "forecast: lower > upper at index " + std::to_string(i));
    }
  }
};

struct Evaluation {
  double picp = 0.0;
  double aace = 0.0;
  double sharpness = 0.0;
  double objective = 0.0;
  double mpil = 0.0;
};

struct OutsideStats {
  std::size_t above_count = 0;
  double above_mean_dist = 0.0;
  std::size_t below_count = 0;
  double below_mean_dist = 0.0;
};

/// Closed interval: a target on either bound counts as covered.
inline bool covered(double lower, double upper, double actual) {
  return lower <= actual && actual <= upper;
}

inline double picp(const IntervalForecast& f) {
  require(f.size() >= 1, ErrorKind::data, "picp: empty forecast");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (covered(f.lower[i], f.upper[i], f.actual[i])) ++hits;
  return static_cast<double>(hits) / static_cast<double>(f.size());
}

inline double aace(double picp_value, double pinc) { return std::abs(picp_value - pinc); }

inline double sharpness_point(double lower, double upper, double actual, double alpha,
                              const SharpnessWeights& w) {
  require(lower <= upper, ErrorKind::data, "sharpness: lower > upper");
  const double width_term = w.w1 * alpha * (upper - lower);
  if (actual < lower) return width_term + w.w2 * (lower - actual);
  if (actual > upper) return width_term + w.w2 * (actual - upper);
  return width_term;
}

/// Min-max scaling to [0, 1]; a constant input maps to all zeros.
inline std::vector<double> min_max_normalize(std::span<const double> values) {
  require(!values.empty(), ErrorKind::data, "min_max_normalize: empty input");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  std::vector<double> out(values.size(), 0.0);
  if (range > 0.0)
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - lo) / range;
  return out;
}

inline double sharpness_mean(const IntervalForecast& f, const SharpnessWeights& w) {
  require(f.size() >= 1, ErrorKind::data, "sharpness_mean: empty forecast");
  std::vector<double> s(f.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    s[i] = sharpness_point(f.lower[i], f.upper[i], f.actual[i], f.pi.alpha, w);
  const auto norm = min_max_normalize(s);
  double sum = 0.0;
  for (double v : norm) sum += v;
  return sum / static_cast<double>(norm.size());
}

inline double objective(double aace_value, double sharpness_value, const ObjectiveWeights& ow) {
  return ow.gamma * aace_value + ow.lambda * sharpness_value;
}

inline double mpil(const IntervalForecast& f) {
  require(f.size() >= 1, ErrorKind::data, "mpil: empty forecast");
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += f.upper[i] - f.lower[i];
  return sum / static_cast<double>(f.size());
}

/// Uncovered points split by the bound they violate, with the mean distance
/// to that bound. An empty group reports count 0 and distance 0.
inline OutsideStats outside_stats(const IntervalForecast& f) {
  OutsideStats st;
  double above = 0.0, below = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.actual[i] > f.upper[i]) {
      ++st.above_count;
      above += f.actual[i] - f.upper[i];
    } else if (f.actual[i] < f.lower[i]) {
      ++st.below_count;
      below += f.lower[i] - f.actual[i];
    }
  }
  if (st.above_count) st.above_mean_dist = above / static_cast<double>(st.above_count);
  if (st.below_count) st.below_mean_dist = below / static_cast<double>(st.below_count);
  return st;
}

inline Evaluation evaluate(const IntervalForecast& f, const SharpnessWeights& w,
                           const ObjectiveWeights& ow) {
  f.validate();
  Evaluation e;
  e.picp = picp(f);
  e.aace = aace(e.picp, f.pi.pinc());
  e.sharpness = sharpness_mean(f, w);
  e.objective = objective(e.aace, e.sharpness, ow);
  e.mpil = mpil(f);
  return e;
}

}  // namespace pelm
