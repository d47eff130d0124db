#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "htbo/kernels.hpp"
#include "htbo/rng.hpp"
#include "htbo/truncation.hpp"

namespace htbo {

/// Quadrature Fourier features for the SE kernel on [0,1]^d.
///
/// Nodes are the Cartesian product of the roots of H_nbar in each
/// dimension, m = nbar^d of them, with product weights nu. The feature map
/// has 2m coordinates: sqrt(nu_i) cos(sqrt(2)/l w_i.x) followed by the
/// matching sines, so that phi(x).phi(y) approximates exp(-|x-y|^2/(2 l^2))
/// and phi(x).phi(x) = 1.
class QffEmbedding {
 public:
  QffEmbedding(int nodes_per_dim, int dim, double lengthscale);

  int nodes_per_dim() const { return nodes_per_dim_; }
  int input_dim() const { return dim_; }
  double lengthscale() const { return lengthscale_; }
  /// m = nbar^d.
  Eigen::Index base_size() const { return nodes_.rows(); }
  /// 2m.
  Eigen::Index dimension() const { return 2 * nodes_.rows(); }
  const Eigen::MatrixXd& nodes() const { return nodes_; }  // m x d
  const Eigen::VectorXd& weights() const { return weights_; }

  Eigen::VectorXd embed(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// 2m x n matrix whose columns are the embedded arms.
  Eigen::MatrixXd embed_arms(const ArmSet& arms) const;

  /// d 2^{d-1} (1 / (sqrt(2) nbar^nbar)) (e / (4 l^2))^nbar.
  static double error_bound(int nodes_per_dim, int dim, double lengthscale);

 private:
  int nodes_per_dim_;
  int dim_;
  double lengthscale_;
  Eigen::MatrixXd nodes_;
  Eigen::VectorXd weights_;
};

/// Dictionary sampled from the played points by approximate ridge leverage
/// scores. Members are distinct arms; an arm enters the first time one of
/// its plays is drawn.
struct NystromDictionary {
  std::vector<Eigen::Index> member_indices;  // positions in the played sequence
  std::vector<Eigen::Index> member_arms;     // arm ids, same order
  std::vector<double> inclusion_probabilities;  // p_{t,i} for every played point
  Eigen::MatrixXd member_gram;                  // K_D
  Eigen::MatrixXd root_pinv;                    // (K_D^{1/2})^+

  Eigen::Index size() const { return static_cast<Eigen::Index>(member_arms.size()); }
};

/// Includes played point i independently with probability
/// min(q * approx_variances[i], 1). `arm_gram` is the kernel over the whole
/// arm grid. Throws ConfigError for q <= 0 or negative variances.
NystromDictionary nystrom_sample(std::span<const Eigen::Index> played_arms,
                                 std::span<const double> approx_variances, double q,
                                 const Eigen::MatrixXd& arm_gram, Rng& rng);

/// Deterministic dictionary over the given played positions (all included).
NystromDictionary nystrom_dictionary(std::span<const Eigen::Index> played_arms,
                                     std::span<const Eigen::Index> member_positions,
                                     const Eigen::MatrixXd& arm_gram);

/// (K_D^{1/2})^+ k_D(x), for the kernel column k_D(x) over the members.
Eigen::VectorXd nystrom_embed(const NystromDictionary& dict, const Eigen::VectorXd& member_kernel);
/// Embedding of grid arm `arm`.
Eigen::VectorXd nystrom_embed(const NystromDictionary& dict, const Eigen::MatrixXd& arm_gram,
                              Eigen::Index arm);
/// m_t x n matrix of embedded grid arms.
Eigen::MatrixXd nystrom_embed_arms(const NystromDictionary& dict, const Eigen::MatrixXd& arm_gram);

enum class VarianceVariant {
  kScaled,                  // (i)  lambda phi^T V^{-1} phi
  kDeterministicTraining,   // (ii) k(x,x) - phi^T phi + lambda phi^T V^{-1} phi
};

/// Approximate posterior in a finite feature space over a finite arm grid.
///
/// rebuild() recomputes everything from the full history: V = Phi^T Phi +
/// lambda I, its inverse square root, the feature-wise truncated estimate
/// theta, and the mean and variance at every arm. Rows of Phi depend only
/// on the played arm, so Phi^T Phi is accumulated from per-arm play counts.
class ApproxPosteriorState {
 public:
  ApproxPosteriorState(Eigen::VectorXd prior_diagonal, double lambda, VarianceVariant variant);

  /// `arm_features` is m_t x n (column a is phi_t(a)).
  void rebuild(const Eigen::MatrixXd& arm_features, std::span<const Eigen::Index> played,
               std::span<const double> rewards, TruncationLevel b);

  double mean(Eigen::Index arm) const { return means_(arm); }
  double variance(Eigen::Index arm) const;
  double raw_variance(Eigen::Index arm) const { return raw_variances_(arm); }
  const Eigen::VectorXd& means() const { return means_; }
  const Eigen::VectorXd& raw_variances() const { return raw_variances_; }
  Eigen::VectorXd variances() const { return raw_variances_.cwiseMax(0.0); }

  Eigen::Index dimension() const { return features_.rows(); }
  Eigen::Index rounds() const { return static_cast<Eigen::Index>(played_.size()); }
  double lambda() const { return lambda_; }
  VarianceVariant variant() const { return variant_; }

  /// Phi_t, t x m_t.
  Eigen::MatrixXd design_matrix() const;
  const Eigen::MatrixXd& gram_matrix() const { return v_; }
  const Eigen::MatrixXd& inv_sqrt() const { return inv_sqrt_; }
  const Eigen::VectorXd& theta() const { return theta_; }
  const Eigen::VectorXd& direction_sums() const { return direction_sums_; }
  /// Whether any weighted term of the newest reward was zeroed in the last
  /// rebuild.
  bool newest_truncated() const { return newest_truncated_; }

 private:
  Eigen::VectorXd prior_diag_;
  double lambda_;
  VarianceVariant variant_;
  Eigen::MatrixXd features_;
  std::vector<Eigen::Index> played_;
  Eigen::MatrixXd v_;
  Eigen::MatrixXd inv_sqrt_;
  Eigen::VectorXd theta_;
  Eigen::VectorXd direction_sums_;
  Eigen::VectorXd means_;
  Eigen::VectorXd raw_variances_;
  bool newest_truncated_ = false;
};

}  // namespace htbo
