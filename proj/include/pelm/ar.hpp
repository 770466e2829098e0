#pragma once

// Off-line autoregressive baseline: OLS fits for orders 0..max_order on a
// common sample, AIC order selection, then frozen one-step-ahead Gaussian
// intervals over a held-out stretch.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pelm/error.hpp"
#include "pelm/interval_metrics.hpp"
#include "pelm/normal.hpp"

namespace pelm {

inline constexpr double kMinResidualSigma = 1e-9;

struct ArModel {
  std::size_t order = 0;
  /// coefficients[k] multiplies y[t - 1 - k].
  std::vector<double> coefficients;
  double intercept = 0.0;
  double residual_sigma = kMinResidualSigma;
  double aic = 0.0;

  double predict_next(std::span<const double> history) const {
    require(history.size() >= order, ErrorKind::data, "ar: insufficient history");
    double y = intercept;
    const std::size_t n = history.size();
    for (std::size_t k = 0; k < order; ++k) y += coefficients[k] * history[n - 1 - k];
    return y;
  }
};

namespace detail {

struct ArFit {
  bool ok = false;
  ArModel model;
  double rss = 0.0;
};

/// OLS of y[t] on (1, y[t-1..t-p]) for t in [start, n).
inline ArFit fit_ar_order(std::span<const double> y, std::size_t p, std::size_t start) {
  const std::size_t rows = y.size() - start;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(p + 1));
  Eigen::VectorXd target(static_cast<Eigen::Index>(rows));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t t = start + r;
    const auto ri = static_cast<Eigen::Index>(r);
    x(ri, 0) = 1.0;
    for (std::size_t k = 0; k < p; ++k) x(ri, static_cast<Eigen::Index>(k + 1)) = y[t - 1 - k];
    target(ri) = y[t];
  }
  ArFit fit;
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < x.cols()) return fit;
  const Eigen::VectorXd coef = qr.solve(target);
  if (!coef.allFinite()) return fit;
  fit.ok = true;
  fit.rss = (x * coef - target).squaredNorm();
  fit.model.order = p;
  fit.model.intercept = coef(0);
  fit.model.coefficients.assign(coef.data() + 1, coef.data() + coef.size());
  const double dof = static_cast<double>(rows) - static_cast<double>(p + 1);
  fit.model.residual_sigma = std::max(std::sqrt(fit.rss / dof), kMinResidualSigma);
  return fit;
}

}  // namespace detail

inline ArModel fit_ar(std::span<const double> train, std::size_t max_order = 16) {
  require(train.size() > max_order + 2, ErrorKind::data,
          "ar: series of length " + std::to_string(train.size()) + " too short for max_order " +
              std::to_string(max_order));
  // Every order is fitted on the same targets so the AIC values compare.
  const std::size_t start = max_order;
  const double n = static_cast<double>(train.size() - start);
  ArModel best;
  bool have = false;
  for (std::size_t p = 0; p <= max_order; ++p) {
    auto fit = detail::fit_ar_order(train, p, start);
    if (!fit.ok) continue;  // singular regressors: keep the lower orders
    const double mse = std::max(fit.rss / n, std::numeric_limits<double>::min());
    fit.model.aic = n * std::log(mse) + 2.0 * static_cast<double>(p + 2);
    if (!have || fit.model.aic < best.aic) {
      best = fit.model;
      have = true;
    }
  }
  require(have, ErrorKind::numeric, "ar: no order could be fitted");
  return best;
}

/// Rolling one-step forecasts for the last `steps` entries of history, each
/// from the realized values before it. Model parameters stay fixed.
inline IntervalBounds ar_intervals(const ArModel& model, std::span<const double> history,
                                   std::size_t steps, double alpha) {
  require(steps <= history.size() && history.size() - steps >= model.order, ErrorKind::data,
          "ar: insufficient history for " + std::to_string(steps) + " steps at order " +
              std::to_string(model.order));
  const double half = two_sided_z(alpha) * model.residual_sigma;
  IntervalBounds b;
  b.lower.reserve(steps);
  b.upper.reserve(steps);
  for (std::size_t t = history.size() - steps; t < history.size(); ++t) {
    const double point = model.predict_next(history.first(t));
    b.lower.push_back(point - half);
    b.upper.push_back(point + half);
  }
  return b;
}

}  // namespace pelm
