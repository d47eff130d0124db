#pragma once

#include <Eigen/Dense>

namespace htbo {

/// Inverse square root and inverse of an SPD matrix from one symmetric
/// eigendecomposition.
struct InverseRoot {
  Eigen::MatrixXd inv_sqrt;
  Eigen::MatrixXd inv;
  double min_eigenvalue = 0.0;
};

/// Eigenvalues are floored at `floor` before inverting. Throws NumericError
/// when the smallest eigenvalue is below `min_allowed`.
InverseRoot spd_inverse_root(const Eigen::MatrixXd& v, double floor, double min_allowed);

/// (K^{1/2})^+ for a PSD matrix K, dropping eigenvalues below
/// `relative_cutoff` times the largest one. Returns an all-zero matrix when
/// K vanishes.
Eigen::MatrixXd psd_pinv_sqrt(const Eigen::MatrixXd& k, double relative_cutoff = 1e-10);

double min_eigenvalue(const Eigen::MatrixXd& symmetric);

}  // namespace htbo
