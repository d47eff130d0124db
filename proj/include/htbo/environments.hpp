#pragma once

#include <Eigen/Dense>
#include <memory>
#include <variant>
#include <vector>

#include "htbo/kernels.hpp"
#include "htbo/rng.hpp"

namespace htbo {

/// y = f(x) + sigma Z.
struct GaussianAdditive {
  double sigma = 1.0;
};

/// y = f(x) + t_dof, with the t draw built as Z / sqrt(chi2_dof / dof).
struct StudentTAdditive {
  int degrees = 3;
};

/// Pareto with the given shape and scale f(x)(shape-1)/shape, so the mean is
/// f(x). Support [scale, inf), density shape scale^shape / y^{shape+1}.
struct ParetoReward {
  double shape = 2.0;
};

/// Two-point law: sgn(f)(v/(2 gap))^{1/alpha} with probability
/// ((2 gap)/v)^{1/alpha} |f|, else 0. Mean f, (1+alpha) raw moment at most v
/// whenever |f| <= 2 gap.
struct BinaryHeavyTail {
  double gap = 0.0;
  double v = 1.0;
  double alpha = 1.0;

  /// gap = 1/2 (1/2)^{alpha/(1+alpha)} v^{1/(1+alpha)}, the largest admissible.
  static BinaryHeavyTail with_max_gap(double v, double alpha);
  static double max_gap(double v, double alpha);
};

/// f(x) everywhere, plus +/- magnitude with equal probability at one arm.
struct SparseSpike {
  double magnitude = 10.0;
  Eigen::Index spike_arm = 0;
};

/// A uniformly drawn row of an observation block (rows x arms).
struct EmpiricalResample {
  std::shared_ptr<const Eigen::MatrixXd> block;
};

using RewardChannel = std::variant<GaussianAdditive, StudentTAdditive, ParetoReward,
                                   BinaryHeavyTail, SparseSpike, EmpiricalResample>;

/// Ground truth over a finite arm set plus a reward channel with a moment
/// bound E|y|^{1+alpha} <= v.
class Environment {
 public:
  /// Checks the channel's requirements on f: positivity (Pareto), |f| <= 2
  /// gap and the gap limit (binary), spike arm in range, block shape
  /// (empirical). f == 0 is rejected as degenerate. B defaults to max |f|.
  Environment(ArmSet arms, Eigen::VectorXd f, RewardChannel channel, double alpha, double v);

  double draw_reward(Eigen::Index arm, Rng& rng) const;

  const ArmSet& arms() const { return arms_; }
  const Eigen::VectorXd& f() const { return f_; }
  Eigen::Index best_arm() const { return best_arm_; }
  double B() const { return B_; }
  double alpha() const { return alpha_; }
  double v() const { return v_; }
  const RewardChannel& channel() const { return channel_; }

 private:
  ArmSet arms_;
  Eigen::VectorXd f_;
  RewardChannel channel_;
  double alpha_;
  double v_;
  double B_ = 0.0;
  Eigen::Index best_arm_ = 0;
};

/// Default (1+alpha)-moment bound of a channel for a function with
/// max |f| = B: B^2 + sigma^2 (Gaussian), B^2 + 3 (Student-t, df 3),
/// B^{1+a} / (2^a (1-a)) (Pareto shape 2), the channel's v (binary),
/// B^2 + magnitude^2 (spike) and the mean |y|^{1+a} of the block
/// (empirical). Throws ConfigError when the channel has no bound at alpha.
double default_moment_bound(const RewardChannel& channel, double alpha, double B);

/// f = sum_i a_i k(., x_i) over the grid for p support arms drawn uniformly
/// (with replacement) and coefficients uniform in [coeff_lo, coeff_hi].
struct RkhsFunction {
  Eigen::VectorXd values;
  std::vector<Eigen::Index> support;
  Eigen::VectorXd coefficients;
  double B = 0.0;  // max |f|
};

/// With `require_positive`, redraws until min f > 0 (at most 100 attempts,
/// then ConfigError). A function with max |f| = 0 is a DegenerateDataError.
RkhsFunction sample_rkhs_function(const Kernel& kernel, const ArmSet& arms, Eigen::Index p,
                                  double coeff_lo, double coeff_hi, bool require_positive, Rng& rng);

struct MomentEstimate {
  double mean = 0.0;            // (1/n) sum |y_i|^{1+alpha}
  double standard_error = 0.0;  // sample std / sqrt(n)
  long samples = 0;
};

/// Monte-Carlo (1+alpha) raw moment at one arm; n_samples >= 10^4.
MomentEstimate certify_moment(const Environment& env, Eigen::Index arm, double alpha,
                              long n_samples, Rng& rng);

}  // namespace htbo
