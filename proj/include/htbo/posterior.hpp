#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "htbo/kernels.hpp"

namespace htbo {

/// Exact GP posterior over a finite arm set with ridge parameter lambda.
///
/// The Cholesky factor L of K_t + lambda I_t is extended by one row per
/// observation. Row t of L is L^{-1} k_t(x_t) (plus the pivot), which is the
/// per-arm vector L^{-1} k_t(x) evaluated at the played arm; the state keeps
/// those vectors for every arm of the grid, so the factor is stored
/// implicitly and each update costs O(n^2) in the number of arms instead of
/// O(t^2) triangular solves per arm. The posterior covariance over the arms
/// and both posterior means (raw and truncated rewards) are maintained
/// alongside.
class PosteriorState {
 public:
  PosteriorState(const Kernel& kernel, const ArmSet& arms, double lambda);
  PosteriorState(Eigen::MatrixXd arm_gram, double lambda);

  /// Appends one observation. Truncated rewards are frozen here and never
  /// revisited. Throws NumericError if the new pivot is non-positive even
  /// after a single 1e-8 jitter.
  void update(Eigen::Index arm, double reward, double truncated_reward);

  /// k_t(x)^T (K_t + lambda I)^{-1} Y_t, with Y_t replaced by the truncated
  /// rewards when `use_truncated` is set. Zero before any observation.
  double mean(Eigen::Index arm, bool use_truncated = false) const;

  /// sigma_t^2(x), clamped at zero.
  double variance(Eigen::Index arm) const;
  /// Unclamped value; may be slightly negative from round-off.
  double raw_variance(Eigen::Index arm) const;

  /// ln |I_t + lambda^{-1} K_t| = 2 sum ln L_ii - t ln lambda.
  double log_det_ratio() const;

  /// Dense t x t lower-triangular factor (assembled on demand).
  Eigen::MatrixXd cholesky() const;

  Eigen::Index rounds() const { return static_cast<Eigen::Index>(arms_.size()); }
  Eigen::Index n_arms() const { return gram_.rows(); }
  double lambda() const { return lambda_; }
  const Eigen::MatrixXd& arm_gram() const { return gram_; }
  const std::vector<Eigen::Index>& observed_arms() const { return arms_; }
  const std::vector<double>& rewards() const { return rewards_; }
  const std::vector<double>& truncated_rewards() const { return truncated_; }

  const Eigen::VectorXd& means(bool use_truncated) const {
    return use_truncated ? mean_truncated_ : mean_;
  }

 private:
  void check_arm(Eigen::Index arm) const;

  Eigen::MatrixXd gram_;
  double lambda_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd solved_;  // n x capacity; column s holds row-s entries of L^{-1} k(x)
  std::vector<double> pivots_;
  Eigen::VectorXd mean_;
  Eigen::VectorXd mean_truncated_;
  std::vector<Eigen::Index> arms_;
  std::vector<double> rewards_;
  std::vector<double> truncated_;
};

/// Realized information gain 1/2 ln |I + lambda^{-1} K_A| of the gram matrix
/// of a subset (duplicates allowed).
double information_gain(const Eigen::MatrixXd& subset_gram, double lambda);

/// Same, for arm indices into a precomputed grid gram matrix.
double information_gain(const Eigen::MatrixXd& arm_gram, std::span<const Eigen::Index> subset,
                        double lambda);

}  // namespace htbo
