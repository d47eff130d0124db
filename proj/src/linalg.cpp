#include "htbo/linalg.hpp"

#include <cmath>
#include <string>

#include "htbo/errors.hpp"

namespace htbo {

InverseRoot spd_inverse_root(const Eigen::MatrixXd& v, double floor, double min_allowed) {
  InverseRoot out;
  if (v.rows() == 0) {
    out.inv_sqrt.resize(0, 0);
    out.inv.resize(0, 0);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(v);
  if (eig.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
  out.min_eigenvalue = eig.eigenvalues().minCoeff();
  if (out.min_eigenvalue < min_allowed) {
    throw NumericError("matrix not positive definite enough: min eigenvalue " +
                       std::to_string(out.min_eigenvalue));
  }
  const Eigen::VectorXd ev = eig.eigenvalues().cwiseMax(floor);
  const Eigen::MatrixXd& u = eig.eigenvectors();
  out.inv_sqrt = u * ev.cwiseSqrt().cwiseInverse().asDiagonal() * u.transpose();
  out.inv = u * ev.cwiseInverse().asDiagonal() * u.transpose();
  return out;
}

Eigen::MatrixXd psd_pinv_sqrt(const Eigen::MatrixXd& k, double relative_cutoff) {
  const Eigen::Index n = k.rows();
  if (n == 0) return Eigen::MatrixXd(0, 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
  if (eig.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
  const double top = eig.eigenvalues().maxCoeff();
  Eigen::VectorXd inv_root = Eigen::VectorXd::Zero(n);
  if (top > 0.0) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double lam = eig.eigenvalues()(i);
      if (lam > relative_cutoff * top) inv_root(i) = 1.0 / std::sqrt(lam);
    }
  }
  const Eigen::MatrixXd& u = eig.eigenvectors();
  return u * inv_root.asDiagonal() * u.transpose();
}

double min_eigenvalue(const Eigen::MatrixXd& symmetric) {
  if (symmetric.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetric, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

}  // namespace htbo
