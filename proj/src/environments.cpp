#include "htbo/environments.hpp"

#include <cmath>
#include <random>
#include <string>

#include "htbo/errors.hpp"

namespace htbo {

double BinaryHeavyTail::max_gap(double v, double alpha) {
  return 0.5 * std::pow(0.5, alpha / (1.0 + alpha)) * std::pow(v, 1.0 / (1.0 + alpha));
}

BinaryHeavyTail BinaryHeavyTail::with_max_gap(double v, double alpha) {
  return BinaryHeavyTail{max_gap(v, alpha), v, alpha};
}

Environment::Environment(ArmSet arms, Eigen::VectorXd f, RewardChannel channel, double alpha,
                         double v)
    : arms_(std::move(arms)), f_(std::move(f)), channel_(std::move(channel)), alpha_(alpha), v_(v) {
  if (f_.size() == 0 || f_.size() != arms_.size()) {
    throw DomainError("environment: f must have one value per arm");
  }
  if (!f_.allFinite()) throw DomainError("environment: f must be finite");
  if (!(alpha_ > 0.0 && alpha_ <= 1.0)) throw ConfigError("environment: alpha must be in (0, 1]");
  if (!(v_ > 0.0)) throw ConfigError("environment: v must be positive");
  B_ = f_.cwiseAbs().maxCoeff();
  if (!(B_ > 0.0)) throw DegenerateDataError("environment: f is identically zero");
  f_.maxCoeff(&best_arm_);

  std::visit(
      [&](const auto& ch) {
        using C = std::decay_t<decltype(ch)>;
        if constexpr (std::is_same_v<C, GaussianAdditive>) {
          if (!(ch.sigma >= 0.0)) throw ConfigError("gaussian channel: sigma must be >= 0");
        } else if constexpr (std::is_same_v<C, StudentTAdditive>) {
          if (ch.degrees < 1) throw ConfigError("student-t channel: degrees must be >= 1");
        } else if constexpr (std::is_same_v<C, ParetoReward>) {
          if (!(ch.shape > 1.0)) throw ConfigError("pareto channel: shape must exceed 1");
          if (!(f_.minCoeff() > 0.0)) throw DomainError("pareto channel: f must be positive at every arm");
        } else if constexpr (std::is_same_v<C, BinaryHeavyTail>) {
          if (!(ch.gap > 0.0)) throw ConfigError("binary channel: gap must be positive");
          if (ch.gap > BinaryHeavyTail::max_gap(ch.v, ch.alpha) * (1.0 + 1e-12)) {
            throw ConfigError("binary channel: gap exceeds 1/2 (1/2)^{a/(1+a)} v^{1/(1+a)}");
          }
          if (B_ > 2.0 * ch.gap * (1.0 + 1e-12)) {
            throw DomainError("binary channel: |f| must not exceed twice the gap");
          }
        } else if constexpr (std::is_same_v<C, SparseSpike>) {
          if (ch.spike_arm < 0 || ch.spike_arm >= f_.size()) {
            throw DomainError("spike channel: spike arm out of range");
          }
        } else {
          if (!ch.block || ch.block->cols() != f_.size() || ch.block->rows() < 1) {
            throw DomainError("empirical channel: block must have one column per arm");
          }
        }
      },
      channel_);
}

double Environment::draw_reward(Eigen::Index arm, Rng& rng) const {
  if (arm < 0 || arm >= f_.size()) throw DomainError("environment: arm out of range");
  const double fx = f_(arm);
  return std::visit(
      [&](const auto& ch) -> double {
        using C = std::decay_t<decltype(ch)>;
        if constexpr (std::is_same_v<C, GaussianAdditive>) {
          std::normal_distribution<double> normal;
          return fx + ch.sigma * normal(rng);
        } else if constexpr (std::is_same_v<C, StudentTAdditive>) {
          std::normal_distribution<double> normal;
          const double z = normal(rng);
          double chi2 = 0.0;
          for (int k = 0; k < ch.degrees; ++k) {
            const double g = normal(rng);
            chi2 += g * g;
          }
          return fx + z / std::sqrt(chi2 / ch.degrees);
        } else if constexpr (std::is_same_v<C, ParetoReward>) {
          const double scale = fx * (ch.shape - 1.0) / ch.shape;
          return scale * std::pow(uniform_open0(rng), -1.0 / ch.shape);
        } else if constexpr (std::is_same_v<C, BinaryHeavyTail>) {
          const double p = std::pow(2.0 * ch.gap / ch.v, 1.0 / ch.alpha) * std::abs(fx);
          if (fx == 0.0) return 0.0;
          const double u = uniform_open0(rng);
          if (u > p) return 0.0;
          const double magnitude = std::pow(ch.v / (2.0 * ch.gap), 1.0 / ch.alpha);
          return fx > 0.0 ? magnitude : -magnitude;
        } else if constexpr (std::is_same_v<C, SparseSpike>) {
          if (arm != ch.spike_arm) return fx;
          return (rng() >> 63) ? fx + ch.magnitude : fx - ch.magnitude;
        } else {
          std::uniform_int_distribution<Eigen::Index> row(0, ch.block->rows() - 1);
          return (*ch.block)(row(rng), arm);
        }
      },
      channel_);
}

double default_moment_bound(const RewardChannel& channel, double alpha, double B) {
  const double half_power = 0.5 * (1.0 + alpha);
  return std::visit(
      [&](const auto& ch) -> double {
        using C = std::decay_t<decltype(ch)>;
        if constexpr (std::is_same_v<C, GaussianAdditive>) {
          return std::pow(B * B + ch.sigma * ch.sigma, half_power);
        } else if constexpr (std::is_same_v<C, StudentTAdditive>) {
          if (ch.degrees <= 2) throw ConfigError("student-t channel has no finite variance bound");
          const double var = static_cast<double>(ch.degrees) / (ch.degrees - 2.0);
          return std::pow(B * B + var, half_power);
        } else if constexpr (std::is_same_v<C, ParetoReward>) {
          if (!(alpha < ch.shape - 1.0)) {
            throw ConfigError("pareto channel: (1+alpha) moment is infinite");
          }
          const double scale = B * (ch.shape - 1.0) / ch.shape;
          return ch.shape * std::pow(scale, 1.0 + alpha) / (ch.shape - 1.0 - alpha);
        } else if constexpr (std::is_same_v<C, BinaryHeavyTail>) {
          return ch.v;
        } else if constexpr (std::is_same_v<C, SparseSpike>) {
          return std::pow(B * B + ch.magnitude * ch.magnitude, half_power);
        } else {
          return ch.block->cwiseAbs().array().pow(1.0 + alpha).mean();
        }
      },
      channel);
}

RkhsFunction sample_rkhs_function(const Kernel& kernel, const ArmSet& arms, Eigen::Index p,
                                  double coeff_lo, double coeff_hi, bool require_positive, Rng& rng) {
  if (p < 1) throw ConfigError("rkhs function: support size must be >= 1");
  if (!(coeff_lo <= coeff_hi)) throw ConfigError("rkhs function: empty coefficient range");
  const Eigen::MatrixXd g = gram(kernel, arms);
  std::uniform_int_distribution<Eigen::Index> pick(0, arms.size() - 1);
  std::uniform_real_distribution<double> coeff(coeff_lo, coeff_hi);

  for (int attempt = 0; attempt < 100; ++attempt) {
    RkhsFunction out;
    out.values = Eigen::VectorXd::Zero(arms.size());
    out.coefficients.resize(p);
    for (Eigen::Index i = 0; i < p; ++i) {
      const Eigen::Index s = pick(rng);
      const double a = coeff(rng);
      out.support.push_back(s);
      out.coefficients(i) = a;
      out.values += a * g.col(s);
    }
    out.B = out.values.cwiseAbs().maxCoeff();
    if (!(out.B > 0.0)) throw DegenerateDataError("rkhs function: sampled f is identically zero");
    if (!require_positive || out.values.minCoeff() > 0.0) return out;
  }
  throw ConfigError("rkhs function: no positive function after 100 attempts");
}

MomentEstimate certify_moment(const Environment& env, Eigen::Index arm, double alpha,
                              long n_samples, Rng& rng) {
  if (n_samples < 10000) throw InputError("certify_moment: need at least 10^4 samples");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (long i = 0; i < n_samples; ++i) {
    const double m = std::pow(std::abs(env.draw_reward(arm, rng)), 1.0 + alpha);
    sum += m;
    sum_sq += m * m;
  }
  const double n = static_cast<double>(n_samples);
  MomentEstimate est;
  est.samples = n_samples;
  est.mean = sum / n;
  const double var = std::max(sum_sq / n - est.mean * est.mean, 0.0) * n / (n - 1.0);
  est.standard_error = std::sqrt(var / n);
  return est;
}

}  // namespace htbo
