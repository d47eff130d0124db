#include "htbo/features.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "htbo/errors.hpp"
#include "htbo/hermite.hpp"
#include "htbo/linalg.hpp"

namespace htbo {

QffEmbedding::QffEmbedding(int nodes_per_dim, int dim, double lengthscale)
    : nodes_per_dim_(nodes_per_dim), dim_(dim), lengthscale_(lengthscale) {
  if (dim < 1) throw ConfigError("QFF: input dimension must be >= 1");
  if (!(lengthscale > 0.0)) throw ConfigError("QFF: lengthscale must be positive");
  const HermiteRule rule = hermite_nodes_weights(nodes_per_dim);
  const double m_real = std::pow(static_cast<double>(nodes_per_dim), dim);
  if (m_real > 1e6) throw ConfigError("QFF: nbar^d exceeds 1e6 features");
  const auto m = static_cast<Eigen::Index>(m_real);

  nodes_.resize(m, dim);
  weights_.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    Eigen::Index rem = i;
    double w = 1.0;
    for (int j = dim - 1; j >= 0; --j) {
      const auto c = static_cast<std::size_t>(rem % nodes_per_dim);
      rem /= nodes_per_dim;
      nodes_(i, j) = rule.roots[c];
      w *= rule.weights[c];
    }
    weights_(i) = w;
  }
}

Eigen::VectorXd QffEmbedding::embed(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dim_) throw DomainError("QFF: point dimension mismatch");
  const Eigen::Index m = base_size();
  const double scale = std::numbers::sqrt2 / lengthscale_;
  Eigen::VectorXd phi(2 * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double arg = scale * nodes_.row(i).dot(x);
    const double root_w = std::sqrt(weights_(i));
    phi(i) = root_w * std::cos(arg);
    phi(m + i) = root_w * std::sin(arg);
  }
  return phi;
}

Eigen::MatrixXd QffEmbedding::embed_arms(const ArmSet& arms) const {
  Eigen::MatrixXd out(dimension(), arms.size());
  for (Eigen::Index a = 0; a < arms.size(); ++a) out.col(a) = embed(arms.points().row(a).transpose());
  return out;
}

double QffEmbedding::error_bound(int nodes_per_dim, int dim, double lengthscale) {
  const double nbar = nodes_per_dim;
  const double d = dim;
  return d * std::pow(2.0, d - 1.0) / (std::numbers::sqrt2 * std::pow(nbar, nbar)) *
         std::pow(std::numbers::e / (4.0 * lengthscale * lengthscale), nbar);
}

NystromDictionary nystrom_dictionary(std::span<const Eigen::Index> played_arms,
                                     std::span<const Eigen::Index> member_positions,
                                     const Eigen::MatrixXd& arm_gram) {
  NystromDictionary dict;
  std::vector<bool> seen(static_cast<std::size_t>(arm_gram.rows()), false);
  for (Eigen::Index pos : member_positions) {
    if (pos < 0 || pos >= static_cast<Eigen::Index>(played_arms.size())) {
      throw DomainError("nystrom: member position out of range");
    }
    const Eigen::Index arm = played_arms[static_cast<std::size_t>(pos)];
    if (seen[static_cast<std::size_t>(arm)]) continue;
    seen[static_cast<std::size_t>(arm)] = true;
    dict.member_indices.push_back(pos);
    dict.member_arms.push_back(arm);
  }
  const Eigen::Index m = dict.size();
  dict.member_gram.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      dict.member_gram(i, j) = arm_gram(dict.member_arms[static_cast<std::size_t>(i)],
                                        dict.member_arms[static_cast<std::size_t>(j)]);
    }
  }
  dict.root_pinv = psd_pinv_sqrt(dict.member_gram);
  return dict;
}

NystromDictionary nystrom_sample(std::span<const Eigen::Index> played_arms,
                                 std::span<const double> approx_variances, double q,
                                 const Eigen::MatrixXd& arm_gram, Rng& rng) {
  if (!(q > 0.0)) throw ConfigError("nystrom: q must be positive");
  if (played_arms.size() != approx_variances.size()) {
    throw DomainError("nystrom: one variance per played point is required");
  }
  std::vector<double> probabilities;
  std::vector<Eigen::Index> positions;
  probabilities.reserve(played_arms.size());
  for (std::size_t i = 0; i < played_arms.size(); ++i) {
    const double var = approx_variances[i];
    if (!(var >= 0.0)) throw ConfigError("nystrom: variances must be non-negative");
    const double p = std::min(q * var, 1.0);
    probabilities.push_back(p);
    if (uniform_open0(rng) <= p) positions.push_back(static_cast<Eigen::Index>(i));
  }
  NystromDictionary dict = nystrom_dictionary(played_arms, positions, arm_gram);
  dict.inclusion_probabilities = std::move(probabilities);
  return dict;
}

Eigen::VectorXd nystrom_embed(const NystromDictionary& dict, const Eigen::VectorXd& member_kernel) {
  if (member_kernel.size() != dict.size()) throw DomainError("nystrom: kernel column size mismatch");
  return dict.root_pinv * member_kernel;
}

Eigen::VectorXd nystrom_embed(const NystromDictionary& dict, const Eigen::MatrixXd& arm_gram,
                              Eigen::Index arm) {
  Eigen::VectorXd k(dict.size());
  for (Eigen::Index i = 0; i < dict.size(); ++i) {
    k(i) = arm_gram(dict.member_arms[static_cast<std::size_t>(i)], arm);
  }
  return nystrom_embed(dict, k);
}

Eigen::MatrixXd nystrom_embed_arms(const NystromDictionary& dict, const Eigen::MatrixXd& arm_gram) {
  Eigen::MatrixXd k(dict.size(), arm_gram.cols());
  for (Eigen::Index i = 0; i < dict.size(); ++i) {
    k.row(i) = arm_gram.row(dict.member_arms[static_cast<std::size_t>(i)]);
  }
  return dict.root_pinv * k;
}

ApproxPosteriorState::ApproxPosteriorState(Eigen::VectorXd prior_diagonal, double lambda,
                                           VarianceVariant variant)
    : prior_diag_(std::move(prior_diagonal)), lambda_(lambda), variant_(variant) {
  if (!(lambda_ > 0.0)) throw ConfigError("approx posterior: lambda must be positive");
  const Eigen::Index n = prior_diag_.size();
  features_.resize(0, n);
  means_ = Eigen::VectorXd::Zero(n);
  raw_variances_ = prior_diag_;
}

double ApproxPosteriorState::variance(Eigen::Index arm) const {
  const double raw = raw_variances_(arm);
  return raw > 0.0 ? raw : 0.0;
}

void ApproxPosteriorState::rebuild(const Eigen::MatrixXd& arm_features,
                                   std::span<const Eigen::Index> played,
                                   std::span<const double> rewards, TruncationLevel b) {
  const Eigen::Index n = prior_diag_.size();
  if (arm_features.cols() != n) throw DomainError("approx posterior: feature matrix has wrong width");
  if (played.size() != rewards.size()) throw DomainError("approx posterior: history length mismatch");
  const Eigen::Index m = arm_features.rows();
  const auto t = static_cast<Eigen::Index>(played.size());

  features_ = arm_features;
  played_.assign(played.begin(), played.end());

  Eigen::VectorXd counts = Eigen::VectorXd::Zero(n);
  for (Eigen::Index a : played) {
    if (a < 0 || a >= n) throw DomainError("approx posterior: arm index out of range");
    counts(a) += 1.0;
  }
  const Eigen::MatrixXd weighted = features_ * counts.cwiseSqrt().asDiagonal();
  v_ = weighted * weighted.transpose();
  v_.diagonal().array() += lambda_;

  const InverseRoot root = spd_inverse_root(v_, 0.5 * lambda_, lambda_ - 1e-8);
  inv_sqrt_ = root.inv_sqrt;

  const Eigen::MatrixXd whitened = inv_sqrt_ * features_;  // m x n
  Eigen::MatrixXd u(m, t);
  Eigen::VectorXd y(t);
  for (Eigen::Index tau = 0; tau < t; ++tau) {
    u.col(tau) = whitened.col(played[static_cast<std::size_t>(tau)]);
    y(tau) = rewards[static_cast<std::size_t>(tau)];
  }
  direction_sums_ = truncated_direction_sums(u, y, b);
  newest_truncated_ = false;
  if (t > 0) {
    for (Eigen::Index i = 0; i < m; ++i) {
      if (!b.admits(u(i, t - 1) * y(t - 1))) newest_truncated_ = true;
    }
  }
  theta_ = inv_sqrt_ * direction_sums_;

  means_ = features_.transpose() * theta_;
  const Eigen::VectorXd quad = lambda_ * whitened.colwise().squaredNorm().transpose();
  if (variant_ == VarianceVariant::kScaled) {
    raw_variances_ = quad;
  } else {
    raw_variances_ = prior_diag_ - features_.colwise().squaredNorm().transpose() + quad;
  }
}

Eigen::MatrixXd ApproxPosteriorState::design_matrix() const {
  Eigen::MatrixXd phi(rounds(), dimension());
  for (Eigen::Index tau = 0; tau < rounds(); ++tau) {
    phi.row(tau) = features_.col(played_[static_cast<std::size_t>(tau)]).transpose();
  }
  return phi;
}

}  // namespace htbo
