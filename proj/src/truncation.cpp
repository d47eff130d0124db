#include "htbo/truncation.hpp"

#include <cmath>
#include <string>

#include "htbo/errors.hpp"
#include "htbo/linalg.hpp"

namespace htbo {

TruncationLevel TruncationLevel::at(double b) {
  if (!(b > 0.0) || !std::isfinite(b)) {
    throw ConfigError("truncation level must be positive and finite, got " + std::to_string(b));
  }
  return TruncationLevel(b, false);
}

void TruncationSchedule::validate() const {
  if (!(v > 0.0)) throw ConfigError("truncation schedule: v must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("truncation schedule: alpha must be in (0, 1]");
  if (!(delta > 0.0 && delta <= 1.0)) throw ConfigError("truncation schedule: delta must be in (0, 1]");
  if (horizon < 1) throw ConfigError("truncation schedule: horizon must be >= 1");
  if (!(multiplier > 0.0)) throw ConfigError("truncation schedule: multiplier must be positive");
}

TruncationLevel TruncationSchedule::level(long t, long dimension) const {
  if (t < 1) throw ConfigError("truncation level: round must be >= 1");
  const double td = static_cast<double>(t);
  const double T = static_cast<double>(horizon);
  const double inv = 1.0 / (1.0 + alpha);
  double b = 0.0;
  switch (kind) {
    case ScheduleKind::kTgp:
      b = std::pow(v, inv) * std::pow(td, 0.5 * inv);
      break;
    case ScheduleKind::kAtaQff:
    case ScheduleKind::kAtaNystrom: {
      if (dimension <= 0) {
        if (kind == ScheduleKind::kAtaNystrom) return TruncationLevel::unlimited();
        throw ConfigError("truncation level: QFF dimension must be positive");
      }
      const double factor = kind == ScheduleKind::kAtaQff ? 2.0 : 4.0;
      const double log_term = std::log(factor * static_cast<double>(dimension) * T / delta);
      b = std::pow(v / log_term, inv) * std::pow(td, (1.0 - alpha) * 0.5 * inv);
      break;
    }
  }
  return TruncationLevel::at(multiplier * b);
}

double truncate_reward(double y, TruncationLevel b) { return b.admits(y) ? y : 0.0; }

Eigen::VectorXd truncated_direction_sums(const Eigen::MatrixXd& weights, const Eigen::VectorXd& y,
                                         TruncationLevel b) {
  if (weights.cols() != y.size()) throw DomainError("truncated_direction_sums: shape mismatch");
  if (b.is_unlimited()) return weights * y;
  const double level = b.value();
  Eigen::VectorXd r = Eigen::VectorXd::Zero(weights.rows());
  for (Eigen::Index tau = 0; tau < weights.cols(); ++tau) {
    const double y_tau = y(tau);
    for (Eigen::Index i = 0; i < weights.rows(); ++i) {
      const double term = weights(i, tau) * y_tau;
      if (std::abs(term) <= level) r(i) += term;
    }
  }
  return r;
}

Eigen::VectorXd adaptive_truncate(const Eigen::MatrixXd& design, const Eigen::MatrixXd& inv_sqrt,
                                  const Eigen::VectorXd& y, TruncationLevel b) {
  if (design.rows() != y.size() || inv_sqrt.rows() != design.cols() ||
      inv_sqrt.cols() != design.cols()) {
    throw DomainError("adaptive_truncate: shape mismatch");
  }
  const Eigen::MatrixXd u = inv_sqrt * design.transpose();
  return inv_sqrt * truncated_direction_sums(u, y, b);
}

Eigen::MatrixXd whitened_columns(const Eigen::MatrixXd& a, double lambda) {
  if (!(lambda > 0.0)) throw ConfigError("whitened_columns: lambda must be positive");
  const Eigen::Index q = a.cols();
  const Eigen::MatrixXd v = a.transpose() * a + lambda * Eigen::MatrixXd::Identity(q, q);
  return a * spd_inverse_root(v, 0.5 * lambda, lambda - 1e-8).inv_sqrt;
}

double column_norm_check(const Eigen::MatrixXd& a, double lambda) {
  if (a.cols() == 0 || a.rows() == 0) return 0.0;
  return whitened_columns(a, lambda).colwise().norm().maxCoeff();
}

}  // namespace htbo
