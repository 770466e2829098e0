#pragma once

// Shared fixtures and independent reference computations for the tests.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pelm/random.hpp"

namespace testing {

inline Eigen::MatrixXd random_matrix(pelm::Rng& rng, Eigen::Index rows, Eigen::Index cols,
                                     double lo = -1.0, double hi = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
  return m;
}

/// rows x cols matrix of rank at most `rank`, built as a product of factors.
inline Eigen::MatrixXd low_rank_matrix(pelm::Rng& rng, Eigen::Index rows, Eigen::Index cols,
                                       Eigen::Index rank) {
  return random_matrix(rng, rows, rank) * random_matrix(rng, rank, cols);
}

/// Plain triple-loop product, kept separate from Eigen's kernels.
inline Eigen::MatrixXd loop_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      long double acc = 0.0L;
      for (Eigen::Index k = 0; k < a.cols(); ++k) acc += static_cast<long double>(a(i, k)) * b(k, j);
      c(i, j) = static_cast<double>(acc);
    }
  return c;
}

inline double max_abs(const Eigen::MatrixXd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Largest violation of the four Moore-Penrose conditions for X = pinv(A).
inline double penrose_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd ax = loop_product(a, x);
  const Eigen::MatrixXd xa = loop_product(x, a);
  double err = max_abs(loop_product(ax, a) - a);
  err = std::max(err, max_abs(loop_product(xa, x) - x));
  err = std::max(err, max_abs(ax - ax.transpose()));
  err = std::max(err, max_abs(xa - xa.transpose()));
  return err;
}

/// erf by its Maclaurin series in long double; accurate for |x| <= 3.
inline long double erf_series(long double x) {
  long double term = x, sum = x;
  for (int n = 1; n < 200; ++n) {
    term *= -x * x / n;
    const long double add = term / (2 * n + 1);
    sum += add;
    if (std::fabs(add) < 1e-30L) break;
  }
  return sum * 2.0L / std::sqrt(3.14159265358979323846264338327950288L);
}

/// Standard normal quantile by bisection on the series CDF.
inline double quantile_by_bisection(double p) {
  long double lo = -10.0L, hi = 10.0L;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    const long double cdf = 0.5L * (1.0L + erf_series(mid / std::sqrt(2.0L)));
    (cdf < p ? lo : hi) = mid;
  }
  return static_cast<double>(0.5L * (lo + hi));
}

/// Metrics straight from their definitions, one point at a time.
struct OracleMetrics {
  double picp, aace, sharpness, objective, mpil;
};

inline OracleMetrics oracle_metrics(const std::vector<double>& lo, const std::vector<double>& hi,
                                    const std::vector<double>& t, double alpha, double w1,
                                    double w2, double gamma, double lambda) {
  const std::size_t n = t.size();
  int inside = 0;
  std::vector<double> s(n);
  double width_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = hi[i] - lo[i];
    width_sum += v;
    if (t[i] < lo[i]) {
      s[i] = w1 * alpha * v + w2 * (lo[i] - t[i]);
    } else if (t[i] > hi[i]) {
      s[i] = w1 * alpha * v + w2 * (t[i] - hi[i]);
    } else {
      s[i] = w1 * alpha * v;
      inside += 1;
    }
  }
  double smin = s[0], smax = s[0];
  for (double x : s) {
    if (x < smin) smin = x;
    if (x > smax) smax = x;
  }
  double norm_sum = 0.0;
  for (double x : s) norm_sum += smax > smin ? (x - smin) / (smax - smin) : 0.0;
  OracleMetrics m{};
  m.picp = static_cast<double>(inside) / static_cast<double>(n);
  m.aace = std::fabs(m.picp - (1.0 - alpha));
  m.sharpness = norm_sum / static_cast<double>(n);
  m.objective = gamma * m.aace + lambda * m.sharpness;
  m.mpil = width_sum / static_cast<double>(n);
  return m;
}

/// Random interval fixture with a mix of covered, low and high targets.
struct Fixture {
  std::vector<double> lower, upper, actual;
};

inline Fixture random_fixture(pelm::Rng& rng, std::size_t n) {
  Fixture f;
  for (std::size_t i = 0; i < n; ++i) {
    const double centre = rng.uniform(100.0, 800.0);
    const double half = rng.uniform(0.0, 120.0);
    f.lower.push_back(centre - half);
    f.upper.push_back(centre + half);
    const double u = rng.uniform01();
    if (u < 0.15)
      f.actual.push_back(centre - half - rng.uniform(0.0, 80.0));
    else if (u < 0.3)
      f.actual.push_back(centre + half + rng.uniform(0.0, 80.0));
    else if (u < 0.35)
      f.actual.push_back(centre + half);  // on the bound
    else
      f.actual.push_back(rng.uniform(centre - half, centre + half));
  }
  return f;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("pelm_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace testing
