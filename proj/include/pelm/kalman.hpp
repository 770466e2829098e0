#pragma once

// On-line local-level (random walk plus noise) Kalman filter:
//   y_t = mu_t + v_t,        v_t ~ N(0, V)
//   mu_t = mu_{t-1} + w_t,   w_t ~ N(0, W)
// The one-step predictive N(a, Q) gives the interval before y_t is seen.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "pelm/error.hpp"
#include "pelm/interval_metrics.hpp"
#include "pelm/normal.hpp"

namespace pelm {

struct KalmanState {
  double level = 0.0;      // m_t
  double level_var = 0.0;  // C_t
  double obs_noise = 1.0;  // V
  double state_noise = 0.0;  // W

  void validate() const {
    require(std::isfinite(level) && level_var >= 0.0 && obs_noise > 0.0 && state_noise >= 0.0,
            ErrorKind::numeric, "kalman: invalid state");
  }
};

struct KalmanStep {
  double mean = 0.0;      // a
  double variance = 0.0;  // Q
  double lower = 0.0;
  double upper = 0.0;
  KalmanState next;
};

/// Forecast y from state, then assimilate it.
inline KalmanStep kalman_step(const KalmanState& state, double y, double alpha) {
  state.validate();
  require(std::isfinite(y), ErrorKind::numeric, "kalman: non-finite observation");
  KalmanStep out;
  const double r = state.level_var + state.state_noise;
  out.mean = state.level;
  out.variance = r + state.obs_noise;
  const double half = two_sided_z(alpha) * std::sqrt(out.variance);
  out.lower = out.mean - half;
  out.upper = out.mean + half;

  const double gain = r / out.variance;
  out.next = state;
  out.next.level = out.mean + gain * (y - out.mean);
  out.next.level_var = (1.0 - gain) * r;
  return out;
}

/// Prior used for every fit and forecast: the first observation as level and
/// the sample variance of the training series as its uncertainty.
inline KalmanState kalman_prior(std::span<const double> train, double v, double w) {
  require(!train.empty(), ErrorKind::data, "kalman: empty series");
  double mean = 0.0;
  for (double y : train) mean += y;
  mean /= static_cast<double>(train.size());
  double var = 0.0;
  for (double y : train) var += (y - mean) * (y - mean);
  var = train.size() > 1 ? var / static_cast<double>(train.size() - 1) : 0.0;
  return KalmanState{train.front(), var, v, w};
}

/// Sum of one-step Gaussian predictive log densities for t = 1..n-1.
inline double kalman_log_likelihood(std::span<const double> y, double v, double w) {
  KalmanState s = kalman_prior(y, v, w);
  double ll = 0.0;
  constexpr double log_2pi = 1.8378770664093454836;
  for (std::size_t t = 1; t < y.size(); ++t) {
    const double r = s.level_var + s.state_noise;
    const double q = r + s.obs_noise;
    const double e = y[t] - s.level;
    ll += -0.5 * (log_2pi + std::log(q) + e * e / q);
    const double gain = r / q;
    s.level += gain * e;
    s.level_var = (1.0 - gain) * r;
  }
  return ll;
}

/// Candidate noise variances. Every (V, W) pair is scored; with refine set,
/// a second log-spaced pass covers the neighbourhood of the first winner.
struct KalmanGrid {
  std::vector<double> obs_noise;    // V candidates, each > 0
  std::vector<double> state_noise;  // W candidates, each >= 0
  bool refine = true;
};

inline std::vector<double> log_space(double lo, double hi, std::size_t count) {
  require(lo > 0.0 && hi >= lo && count >= 1, ErrorKind::config, "log_space: bad range");
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  return out;
}

/// Grid spanning 1e-4..10 times the variance of the first differences.
inline KalmanGrid default_kalman_grid(std::span<const double> train, std::size_t points = 25) {
  require(train.size() >= 2, ErrorKind::data, "kalman: series too short for a grid");
  std::vector<double> diff(train.size() - 1);
  for (std::size_t i = 1; i < train.size(); ++i) diff[i - 1] = train[i] - train[i - 1];
  double mean = 0.0;
  for (double d : diff) mean += d;
  mean /= static_cast<double>(diff.size());
  double var = 0.0;
  for (double d : diff) var += (d - mean) * (d - mean);
  var /= static_cast<double>(diff.size());
  const double scale = var > 0.0 ? var : 1.0;
  KalmanGrid g;
  g.obs_noise = log_space(scale * 1e-4, scale * 10.0, points);
  g.state_noise = log_space(scale * 1e-4, scale * 10.0, points);
  return g;
}

struct KalmanFit {
  double obs_noise = 1.0;
  double state_noise = 0.0;
  double log_likelihood = 0.0;
};

inline KalmanFit kalman_fit(std::span<const double> train, const KalmanGrid& grid) {
  require(train.size() >= 10, ErrorKind::data, "kalman: need at least 10 training points");
  require(!grid.obs_noise.empty() && !grid.state_noise.empty(), ErrorKind::config,
          "kalman: empty grid");
  for (double v : grid.obs_noise)
    require(v > 0.0 && std::isfinite(v), ErrorKind::config, "kalman: V candidates must be > 0");
  for (double w : grid.state_noise)
    require(w >= 0.0 && std::isfinite(w), ErrorKind::config, "kalman: W candidates must be >= 0");

  const double first = train.front();
  const bool constant =
      std::all_of(train.begin(), train.end(), [&](double y) { return y == first; });

  auto search = [&](const std::vector<double>& vs, const std::vector<double>& ws,
                    std::size_t& bi, std::size_t& bj) {
    KalmanFit best{vs[0], ws[0], -std::numeric_limits<double>::infinity()};
    bi = bj = 0;
    for (std::size_t i = 0; i < vs.size(); ++i)
      for (std::size_t j = 0; j < ws.size(); ++j) {
        const double ll = kalman_log_likelihood(train, vs[i], ws[j]);
        if (ll > best.log_likelihood) {
          best = {vs[i], ws[j], ll};
          bi = i;
          bj = j;
        }
      }
    return best;
  };

  std::size_t bi = 0, bj = 0;
  KalmanFit best = search(grid.obs_noise, grid.state_noise, bi, bj);

  if (grid.refine && !constant) {
    // Neighbourhood of the winner along each axis, in log space. Zero W
    // candidates cannot be log-spaced, so that axis is left as is.
    auto around = [&](const std::vector<double>& axis, std::size_t k) {
      std::vector<double> sorted = axis;
      std::sort(sorted.begin(), sorted.end());
      const auto pos = static_cast<std::size_t>(
          std::lower_bound(sorted.begin(), sorted.end(), axis[k]) - sorted.begin());
      const double lo = sorted[pos > 0 ? pos - 1 : pos];
      const double hi = sorted[pos + 1 < sorted.size() ? pos + 1 : pos];
      if (lo <= 0.0 || lo == hi) return std::vector<double>{axis[k]};
      return log_space(lo, hi, std::max<std::size_t>(axis.size(), 5));
    };
    std::size_t ri = 0, rj = 0;
    const KalmanFit refined =
        search(around(grid.obs_noise, bi), around(grid.state_noise, bj), ri, rj);
    if (refined.log_likelihood > best.log_likelihood) best = refined;
  }

  if (constant) {
    // Nothing to learn about the level drift.
    best.state_noise = *std::min_element(grid.state_noise.begin(), grid.state_noise.end());
    best.log_likelihood = kalman_log_likelihood(train, best.obs_noise, best.state_noise);
  }
  return best;
}

/// Filters through train (warm-up, no output) and then emits one-step
/// intervals for each value of test before assimilating it.
inline IntervalBounds kalman_intervals(std::span<const double> train,
                                       std::span<const double> test, const KalmanFit& fit,
                                       double alpha) {
  KalmanState s = kalman_prior(train, fit.obs_noise, fit.state_noise);
  for (std::size_t t = 1; t < train.size(); ++t) s = kalman_step(s, train[t], alpha).next;
  IntervalBounds b;
  b.lower.reserve(test.size());
  b.upper.reserve(test.size());
  for (double y : test) {
    const KalmanStep st = kalman_step(s, y, alpha);
    b.lower.push_back(st.lower);
    b.upper.push_back(st.upper);
    s = st.next;
  }
  return b;
}

}  // namespace pelm
