#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace htbo {

/// A truncation threshold b, or the explicit "no truncation" level. The
/// unlimited level never enters arithmetic as a floating-point infinity.
class TruncationLevel {
 public:
  static TruncationLevel unlimited() { return TruncationLevel(0.0, true); }
  /// Throws ConfigError unless b > 0.
  static TruncationLevel at(double b);

  bool is_unlimited() const { return unlimited_; }
  /// Threshold value; only meaningful when !is_unlimited().
  double value() const { return value_; }
  /// |x| <= b (inclusive), always true when unlimited.
  bool admits(double x) const { return unlimited_ || std::abs(x) <= value_; }

 private:
  TruncationLevel(double v, bool u) : value_(v), unlimited_(u) {}
  double value_;
  bool unlimited_;
};

enum class ScheduleKind {
  kTgp,         // b_t = v^{1/(1+a)} t^{1/(2(1+a))}
  kAtaQff,      // b_t = (v / ln(2 m T / delta))^{1/(1+a)} t^{(1-a)/(2(1+a))}
  kAtaNystrom,  // b_t = (v / ln(4 m_t T / delta))^{1/(1+a)} t^{(1-a)/(2(1+a))}
};

struct TruncationSchedule {
  ScheduleKind kind = ScheduleKind::kTgp;
  double v = 1.0;
  double alpha = 1.0;
  double delta = 0.1;
  long horizon = 1;
  double multiplier = 1.0;

  /// Throws ConfigError on v <= 0, alpha outside (0, 1], delta outside
  /// (0, 1], horizon < 1 or a non-positive multiplier.
  void validate() const;

  /// b_t for round t >= 1. `dimension` is m (QFF) or m_t (Nystrom) and is
  /// ignored for kTgp. A zero-dimensional Nystrom embedding has nothing to
  /// truncate and yields the unlimited level.
  TruncationLevel level(long t, long dimension = 0) const;
};

/// y 1{|y| <= b}: rewards beyond the level are zeroed, not clipped.
double truncate_reward(double y, TruncationLevel b);

/// r_i = sum_tau u_{i,tau} y_tau 1{|u_{i,tau} y_tau| <= b} for every row u_i
/// of `weights` (m x t).
Eigen::VectorXd truncated_direction_sums(const Eigen::MatrixXd& weights, const Eigen::VectorXd& y,
                                         TruncationLevel b);

/// theta = V^{-1/2} [r_1..r_m] with u_i the rows of V^{-1/2} Phi^T, where
/// `design` is Phi (t x m) and `inv_sqrt` is V^{-1/2} for
/// V = Phi^T Phi + lambda I. With the unlimited level this is the ridge
/// estimate V^{-1} Phi^T y.
Eigen::VectorXd adaptive_truncate(const Eigen::MatrixXd& design, const Eigen::MatrixXd& inv_sqrt,
                                  const Eigen::VectorXd& y, TruncationLevel b);

/// A (A^T A + lambda I)^{-1/2} for a p x q matrix A.
Eigen::MatrixXd whitened_columns(const Eigen::MatrixXd& a, double lambda);

/// Largest l2 column norm of A (A^T A + lambda I)^{-1/2}; bounded by one.
double column_norm_check(const Eigen::MatrixXd& a, double lambda);

}  // namespace htbo
