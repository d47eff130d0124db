#include "htbo/posterior.hpp"

#include <cassert>
#include <cmath>
#include <string>

#include "htbo/errors.hpp"

namespace htbo {

PosteriorState::PosteriorState(const Kernel& kernel, const ArmSet& arms, double lambda)
    : PosteriorState(gram(kernel, arms), lambda) {}

PosteriorState::PosteriorState(Eigen::MatrixXd arm_gram, double lambda)
    : gram_(std::move(arm_gram)), lambda_(lambda) {
  if (!(lambda_ > 0.0)) throw ConfigError("posterior: lambda must be positive");
  if (gram_.rows() == 0 || gram_.rows() != gram_.cols()) {
    throw DomainError("posterior: arm gram matrix must be square and non-empty");
  }
  cov_ = gram_;
  mean_ = Eigen::VectorXd::Zero(gram_.rows());
  mean_truncated_ = Eigen::VectorXd::Zero(gram_.rows());
  solved_.resize(gram_.rows(), 16);
}

void PosteriorState::check_arm(Eigen::Index arm) const {
  if (arm < 0 || arm >= n_arms()) {
    throw DomainError("posterior: arm index " + std::to_string(arm) + " out of range");
  }
}

void PosteriorState::update(Eigen::Index arm, double reward, double truncated_reward) {
  check_arm(arm);
  const Eigen::Index t = rounds();
  double pivot_sq = cov_(arm, arm) + lambda_;
  if (!(pivot_sq > 0.0)) {
    pivot_sq += 1e-8;
    if (!(pivot_sq > 0.0)) {
      throw NumericError("posterior: Cholesky breakdown at round " + std::to_string(t + 1));
    }
  }
  const double pivot = std::sqrt(pivot_sq);

  if (t == solved_.cols()) solved_.conservativeResize(Eigen::NoChange, 2 * solved_.cols());
  const Eigen::VectorXd column = cov_.col(arm) / pivot;
  solved_.col(t) = column;
  cov_.noalias() -= column * column.transpose();

  const double z = (reward - mean_(arm)) / pivot;
  const double z_truncated = (truncated_reward - mean_truncated_(arm)) / pivot;
  mean_ += z * column;
  mean_truncated_ += z_truncated * column;

  pivots_.push_back(pivot);
  arms_.push_back(arm);
  rewards_.push_back(reward);
  truncated_.push_back(truncated_reward);
}

double PosteriorState::mean(Eigen::Index arm, bool use_truncated) const {
  check_arm(arm);
  return use_truncated ? mean_truncated_(arm) : mean_(arm);
}

double PosteriorState::raw_variance(Eigen::Index arm) const {
  check_arm(arm);
  return cov_(arm, arm);
}

double PosteriorState::variance(Eigen::Index arm) const {
  const double raw = raw_variance(arm);
  assert(raw >= -1e-10);
  return raw > 0.0 ? raw : 0.0;
}

double PosteriorState::log_det_ratio() const {
  double sum = 0.0;
  for (double p : pivots_) sum += std::log(p);
  return 2.0 * sum - static_cast<double>(rounds()) * std::log(lambda_);
}

Eigen::MatrixXd PosteriorState::cholesky() const {
  const Eigen::Index t = rounds();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(t, t);
  for (Eigen::Index s = 0; s < t; ++s) {
    const Eigen::Index a = arms_[static_cast<std::size_t>(s)];
    for (Eigen::Index j = 0; j < s; ++j) l(s, j) = solved_(a, j);
    l(s, s) = pivots_[static_cast<std::size_t>(s)];
  }
  return l;
}

double information_gain(const Eigen::MatrixXd& subset_gram, double lambda) {
  if (!(lambda > 0.0)) throw ConfigError("information_gain: lambda must be positive");
  const Eigen::Index n = subset_gram.rows();
  if (n == 0) return 0.0;
  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) + subset_gram / lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw NumericError("information_gain: factorization failed");
  const Eigen::VectorXd d = llt.matrixL().toDenseMatrix().diagonal();
  return d.array().log().sum();
}

double information_gain(const Eigen::MatrixXd& arm_gram, std::span<const Eigen::Index> subset,
                        double lambda) {
  const auto n = static_cast<Eigen::Index>(subset.size());
  Eigen::MatrixXd sub(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      sub(i, j) = arm_gram(subset[static_cast<std::size_t>(i)], subset[static_cast<std::size_t>(j)]);
    }
  }
  return information_gain(sub, lambda);
}

}  // namespace htbo
