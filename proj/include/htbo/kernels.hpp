#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <variant>

namespace htbo {

/// Finite set of arms, one per row of `points`. Analytic kernels read the
/// coordinates; empirical kernels treat the single coordinate as an index.
class ArmSet {
 public:
  ArmSet() = default;
  explicit ArmSet(Eigen::MatrixXd points);

  /// `n` evenly spaced points covering [0, 1] (endpoints included).
  static ArmSet unit_grid(Eigen::Index n);
  /// Cartesian product grid of `per_dim` points per axis over [0, 1]^d.
  static ArmSet unit_grid(Eigen::Index per_dim, Eigen::Index dim);
  /// Arms 0..n-1 addressed by index, for empirical kernels.
  static ArmSet indexed(Eigen::Index n);

  Eigen::Index size() const { return points_.rows(); }
  Eigen::Index dim() const { return points_.cols(); }
  const Eigen::MatrixXd& points() const { return points_; }
  Eigen::VectorXd point(Eigen::Index i) const { return points_.row(i).transpose(); }

  /// Checks non-emptiness and distinctness; with `unit_cube` also that every
  /// coordinate lies in [0, 1]. Throws DomainError.
  void validate(bool unit_cube) const;

 private:
  Eigen::MatrixXd points_;
};

enum class MaternSmoothness { kHalf, kThreeHalves, kFiveHalves };

struct SquaredExponential {
  double lengthscale = 1.0;
};

struct Matern {
  double lengthscale = 1.0;
  MaternSmoothness smoothness = MaternSmoothness::kFiveHalves;
};

/// x^T y / d, scaled so that k(x, x) <= 1 on the unit cube.
struct Linear {};

/// Kernel given by an explicit PSD matrix over indexed arms 0..n-1.
struct Empirical {
  std::shared_ptr<const Eigen::MatrixXd> matrix;
};

class Kernel {
 public:
  using Variant = std::variant<SquaredExponential, Matern, Linear, Empirical>;

  explicit Kernel(Variant v);

  static Kernel squared_exponential(double lengthscale);
  static Kernel matern(double lengthscale, MaternSmoothness smoothness);
  static Kernel linear();
  /// Wraps a symmetric matrix; the caller is responsible for PSD-ness and
  /// the unit diagonal bound (empirical_kernel_from_samples enforces both).
  static Kernel empirical(Eigen::MatrixXd matrix);

  /// k(x, y). For empirical kernels the points are one-dimensional integer
  /// indices; anything else throws DomainError.
  double evaluate(const Eigen::Ref<const Eigen::VectorXd>& x,
                  const Eigen::Ref<const Eigen::VectorXd>& y) const;

  bool is_empirical() const { return std::holds_alternative<Empirical>(variant_); }
  bool is_squared_exponential() const {
    return std::holds_alternative<SquaredExponential>(variant_);
  }
  const Variant& variant() const { return variant_; }
  std::string describe() const;

 private:
  Variant variant_;
};

/// Symmetric n x n matrix [k(a_i, a_j)].
Eigen::MatrixXd gram(const Kernel& kernel, const ArmSet& arms);

/// Rows index `rows`, columns index `cols`.
Eigen::MatrixXd cross_gram(const Kernel& kernel, const ArmSet& rows, const ArmSet& cols);

/// Builds an empirical kernel over n_arms indexed arms from an
/// n_obs x n_arms sample block: columns are standardized, their covariance
/// is taken, negative eigenvalues are clipped to zero and the result is
/// scaled so that the largest diagonal entry is exactly 1.
Kernel empirical_kernel_from_samples(const Eigen::MatrixXd& samples);

}  // namespace htbo
