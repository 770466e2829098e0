#pragma once

#include <Eigen/Dense>

#include "pelm/error.hpp"

namespace pelm {

/// Moore-Penrose pseudoinverse through the SVD M = U S V^T:
/// M^+ = V S^+ U^T, where singular values at or below tol * sigma_max are
/// treated as zero.
inline Eigen::MatrixXd pinv(const Eigen::MatrixXd& m, double tol = 1e-12) {
  require(m.allFinite(), ErrorKind::numeric, "pinv: non-finite input");
  require(tol >= 0.0, ErrorKind::config, "pinv: negative tolerance");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.cols(), m.rows());
  if (m.size() == 0) return out;

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return out;

  const double cutoff = tol * s(0);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cutoff) inv(i) = 1.0 / s(i);

  out.noalias() = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  return out;
}

}  // namespace pelm
