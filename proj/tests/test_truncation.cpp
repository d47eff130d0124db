#include <doctest.h>

#include <cmath>
#include <random>

#include "htbo/errors.hpp"
#include "htbo/rng.hpp"
#include "htbo/truncation.hpp"

using namespace htbo;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> n;
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

// A (A^T A + lambda I)^{-1/2} via the thin SVD A = U S W^T:
// U diag(s / sqrt(s^2 + lambda)) W^T.
Eigen::MatrixXd svd_whitened(const Eigen::MatrixXd& a, double lambda) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd s = svd.singularValues();
  const Eigen::VectorXd d = (s.array() / (s.array().square() + lambda).sqrt()).matrix();
  return svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
}

TruncationSchedule schedule(ScheduleKind kind, double v, double alpha, double delta, long horizon) {
  TruncationSchedule s;
  s.kind = kind;
  s.v = v;
  s.alpha = alpha;
  s.delta = delta;
  s.horizon = horizon;
  return s;
}

}  // namespace

TEST_CASE("truncation levels") {
  const auto tgp = schedule(ScheduleKind::kTgp, 1.0, 1.0, 0.1, 100);
  CHECK(tgp.level(16).value() == doctest::Approx(2.0).epsilon(1e-15));

  // (1 / ln 8000)^{2/3}, evaluated to 20 digits with an arbitrary-precision calculator.
  const auto qff = schedule(ScheduleKind::kAtaQff, 1.0, 0.5, 0.1, 100);
  CHECK(qff.level(1, 4).value() == doctest::Approx(0.23133987579193156308).epsilon(1e-14));

  const auto flat = schedule(ScheduleKind::kAtaQff, 2.0, 1.0, 0.1, 1000);
  CHECK(flat.level(1, 8).value() == flat.level(999, 8).value());

  const auto nys = schedule(ScheduleKind::kAtaNystrom, 3.0, 0.5, 0.05, 500);
  CHECK(nys.level(7, 0).is_unlimited());
  CHECK(nys.level(7, 5).value() ==
        doctest::Approx(std::pow(3.0 / std::log(4.0 * 5 * 500 / 0.05), 1.0 / 1.5) *
                        std::pow(7.0, 0.5 / 3.0)));
  CHECK_THROWS_AS(qff.level(1, 0), ConfigError);
  CHECK_THROWS_AS(tgp.level(0), ConfigError);

  // Non-decreasing in t for fixed dimension.
  for (auto kind : {ScheduleKind::kTgp, ScheduleKind::kAtaQff, ScheduleKind::kAtaNystrom}) {
    for (double alpha : {0.3, 0.9, 1.0}) {
      const auto s = schedule(kind, 2.0, alpha, 0.1, 1000);
      double prev = 0.0;
      for (long t = 1; t <= 1000; ++t) {
        const double b = s.level(t, 10).value();
        CHECK(b > 0.0);
        CHECK(b >= prev);
        prev = b;
      }
    }
  }

  auto bad = tgp;
  bad.alpha = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(TruncationLevel::at(0.0), ConfigError);
  CHECK_THROWS_AS(TruncationLevel::at(INFINITY), ConfigError);
}

TEST_CASE("per-reward truncation zeroes and is inclusive") {
  const auto b = TruncationLevel::at(2.0);
  CHECK(truncate_reward(1.5, b) == 1.5);
  CHECK(truncate_reward(-3.0, b) == 0.0);
  CHECK(truncate_reward(2.0, b) == 2.0);
  CHECK(truncate_reward(-2.0, b) == -2.0);
  CHECK(truncate_reward(1e300, TruncationLevel::unlimited()) == 1e300);
}

TEST_CASE("direction sums are inclusive at the threshold") {
  Eigen::MatrixXd w(1, 3);
  w << 0.5, 0.5, 0.5;
  Eigen::VectorXd y(3);
  y << 4.0, 4.0000001, -4.0;
  const Eigen::VectorXd r = truncated_direction_sums(w, y, TruncationLevel::at(2.0));
  CHECK(r(0) == 0.0);
}

TEST_CASE("ridge reduction with no truncation") {
  Rng rng(2);
  std::uniform_int_distribution<int> tdist(1, 100);
  std::uniform_int_distribution<int> mdist(1, 20);
  for (int inst = 0; inst < 100; ++inst) {
    const int t = tdist(rng);
    const int m = mdist(rng);
    const Eigen::MatrixXd phi = random_matrix(rng, t, m);
    const Eigen::VectorXd y = random_matrix(rng, t, 1);
    const Eigen::MatrixXd v = phi.transpose() * phi + Eigen::MatrixXd::Identity(m, m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(v);
    const Eigen::MatrixXd inv_sqrt = eig.operatorInverseSqrt();
    const Eigen::VectorXd ridge = v.ldlt().solve(phi.transpose() * y);
    const Eigen::VectorXd theta = adaptive_truncate(phi, inv_sqrt, y, TruncationLevel::unlimited());
    CHECK((theta - ridge).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(adaptive_truncate(phi, inv_sqrt, Eigen::VectorXd::Zero(t), TruncationLevel::at(0.1)).isZero());
  }
}

TEST_CASE("outlier insensitivity") {
  Rng rng(4);
  const int t = 51;
  const int m = 6;
  const double lambda = 1.0;
  const Eigen::MatrixXd phi = random_matrix(rng, t, m) / std::sqrt(static_cast<double>(m));
  Eigen::VectorXd y = Eigen::VectorXd::Ones(t);
  const Eigen::MatrixXd v = phi.transpose() * phi + lambda * Eigen::MatrixXd::Identity(m, m);
  const Eigen::MatrixXd inv_sqrt = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(v).operatorInverseSqrt();
  const auto sched = schedule(ScheduleKind::kAtaQff, 2.0, 1.0, 0.1, 1000);
  const TruncationLevel b = sched.level(t, m);

  const Eigen::VectorXd clean = adaptive_truncate(phi, inv_sqrt, y, b);
  const int tau = 17;
  y(tau) = 1e6;
  const Eigen::VectorXd dirty = adaptive_truncate(phi, inv_sqrt, y, b);
  const Eigen::VectorXd ridge = adaptive_truncate(phi, inv_sqrt, y, TruncationLevel::unlimited());
  CHECK(dirty.norm() <= ridge.norm());
  CHECK((dirty - clean).norm() <= m * b.value() / std::sqrt(lambda));

  // Brute-force the contribution of tau to each direction sum.
  const Eigen::MatrixXd u = inv_sqrt * phi.transpose();
  for (int i = 0; i < m; ++i) {
    const double term = u(i, tau) * y(tau);
    const double kept = std::abs(term) <= b.value() ? term : 0.0;
    CHECK(std::abs(kept) <= b.value());
    double r = 0.0;
    for (int s = 0; s < t; ++s) {
      const double x = u(i, s) * y(s);
      if (std::abs(x) <= b.value()) r += x;
    }
    CHECK(truncated_direction_sums(u, y, b)(i) == doctest::Approx(r).epsilon(1e-14));
  }
}

TEST_CASE("column-norm lemma") {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(4, 4);
  CHECK(column_norm_check(id, 1.0) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(column_norm_check(Eigen::MatrixXd::Zero(5, 3), 1.0) == 0.0);

  Rng rng(6);
  for (int seed = 0; seed < 100; ++seed) {
    const Eigen::MatrixXd a = random_matrix(rng, 20, 6) * (seed % 7 + 0.1);
    const Eigen::MatrixXd w = whitened_columns(a, 1.0);
    CHECK((w - svd_whitened(a, 1.0)).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(column_norm_check(a, 1.0) <= 1.0 + 1e-10);
    for (double alpha : {0.2, 0.5, 1.0}) {
      const double cap = std::pow(20.0, (1.0 - alpha) / (2.0 * (1.0 + alpha)));
      for (Eigen::Index k = 0; k < w.cols(); ++k) {
        const double lp =
            std::pow(w.col(k).cwiseAbs().array().pow(1.0 + alpha).sum(), 1.0 / (1.0 + alpha));
        CHECK(lp <= cap + 1e-10);
      }
    }
  }
}
