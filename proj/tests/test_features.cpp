#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "htbo/errors.hpp"
#include "htbo/features.hpp"
#include "htbo/hermite.hpp"
#include "htbo/linalg.hpp"
#include "htbo/posterior.hpp"
#include "htbo/truncation.hpp"

using namespace htbo;

namespace {

// Golub-Welsch: Gauss-Hermite nodes are the eigenvalues of the Jacobi matrix
// with off-diagonal sqrt(k/2); normalized weights are the squared first
// components of the eigenvectors.
HermiteRule jacobi_oracle(int n) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) j(k, k - 1) = j(k - 1, k) = std::sqrt(k / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(j);
  HermiteRule r;
  for (int i = 0; i < n; ++i) {
    r.roots.push_back(eig.eigenvalues()(i));
    r.weights.push_back(eig.eigenvectors()(0, i) * eig.eigenvectors()(0, i));
  }
  return r;
}

// Distance from z to the nearest root of H_n, estimated by the Newton
// correction h_n / h_n' in extended precision (h_k = H_k / sqrt(2^k k!)).
double root_residual(int n, double z) {
  long double prev = 0.0L;
  long double cur = 1.0L;
  const long double x = z;
  for (int k = 1; k <= n; ++k) {
    const long double next = std::sqrt(2.0L / k) * x * cur - std::sqrt((k - 1.0L) / k) * prev;
    prev = cur;
    cur = next;
  }
  return static_cast<double>(std::abs(cur / (std::sqrt(2.0L * n) * prev)));
}

Eigen::MatrixXd se_gram(const ArmSet& arms, double l) {
  return gram(Kernel::squared_exponential(l), arms);
}

}  // namespace

TEST_CASE("Hermite rules: small orders by hand") {
  const HermiteRule one = hermite_nodes_weights(1);
  CHECK(one.roots == std::vector<double>{0.0});
  CHECK(one.weights[0] == doctest::Approx(1.0).epsilon(1e-15));

  const HermiteRule two = hermite_nodes_weights(2);
  CHECK(two.roots[0] == doctest::Approx(-1.0 / std::numbers::sqrt2).epsilon(1e-14));
  CHECK(two.roots[1] == doctest::Approx(1.0 / std::numbers::sqrt2).epsilon(1e-14));
  CHECK(two.weights[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(two.weights[1] == doctest::Approx(0.5).epsilon(1e-14));

  // Direct evaluation of 2^{n-1} n! / (n^2 H_{n-1}(z)^2) for n = 5.
  const HermiteRule five = hermite_nodes_weights(5);
  for (std::size_t i = 0; i < 5; ++i) {
    const double h = hermite_polynomial(4, five.roots[i]);
    CHECK(five.weights[i] == doctest::Approx(16.0 * 120.0 / (25.0 * h * h)).epsilon(1e-12));
  }
}

TEST_CASE("Hermite rules agree with the Jacobi-matrix oracle") {
  for (int n = 1; n <= 64; ++n) {
    const HermiteRule r = hermite_nodes_weights(n);
    const HermiteRule o = jacobi_oracle(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      CHECK(r.roots[i] == doctest::Approx(o.roots[i]).epsilon(1e-11).scale(1.0));
      CHECK(r.weights[i] > 0.0);
      if (o.weights[i] > 1e-200) {
        CHECK(r.weights[i] == doctest::Approx(o.weights[i]).epsilon(1e-8));
      }
      CHECK(r.roots[i] == doctest::Approx(-r.roots[n - 1 - i]).epsilon(1e-14).scale(1.0));
      CHECK(root_residual(n, r.roots[i]) <= 1e-12);
      if (i > 0) CHECK(r.roots[i] > r.roots[i - 1]);
      sum += r.weights[i];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(hermite_nodes_weights(0), ConfigError);
  CHECK_THROWS_AS(hermite_nodes_weights(65), ConfigError);
}

TEST_CASE("QFF embedding") {
  SUBCASE("unit norm and exact diagonal") {
    const QffEmbedding q(8, 2, 0.5);
    CHECK(q.base_size() == 64);
    CHECK(q.dimension() == 128);
    CHECK(q.weights().sum() == doctest::Approx(1.0).epsilon(1e-12));
    Rng rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
      const Eigen::Vector2d x(u(rng), u(rng));
      CHECK(std::abs(q.embed(x).squaredNorm() - 1.0) <= 1e-12);
    }
  }
  SUBCASE("layout: cosines then sines") {
    const QffEmbedding q(3, 1, 0.7);
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.3);
    const Eigen::VectorXd phi = q.embed(x);
    for (Eigen::Index i = 0; i < 3; ++i) {
      const double arg = std::numbers::sqrt2 / 0.7 * q.nodes()(i, 0) * 0.3;
      CHECK(phi(i) == doctest::Approx(std::sqrt(q.weights()(i)) * std::cos(arg)));
      CHECK(phi(3 + i) == doctest::Approx(std::sqrt(q.weights()(i)) * std::sin(arg)));
    }
  }
  SUBCASE("error bound holds whenever nbar > 1/l^2") {
    for (double l : {1.0, 0.5}) {
      const ArmSet grid = ArmSet::unit_grid(200);
      const Eigen::MatrixXd exact = se_gram(grid, l);
      for (int nbar = 2; nbar <= 14; ++nbar) {
        const double bound = QffEmbedding::error_bound(nbar, 1, l);
        // Below ~1e-14 the comparison measures double round-off, not the bound.
        if (!(nbar > 1.0 / (l * l)) || bound < 1e-14) continue;
        const QffEmbedding q(nbar, 1, l);
        const Eigen::MatrixXd phi = q.embed_arms(grid);
        const double err = (phi.transpose() * phi - exact).cwiseAbs().maxCoeff();
        CHECK(err <= bound);
      }
    }
  }
  SUBCASE("bound formula") {
    const double b = QffEmbedding::error_bound(4, 1, 1.0);
    CHECK(b == doctest::Approx(1.0 / (std::numbers::sqrt2 * 256.0) * std::pow(std::numbers::e / 4.0, 4)));
    CHECK(QffEmbedding::error_bound(4, 2, 1.0) == doctest::Approx(4.0 * b));
  }
}

TEST_CASE("Nystrom dictionary and embedding") {
  const ArmSet arms = ArmSet::unit_grid(10);
  const Eigen::MatrixXd g = se_gram(arms, 0.2);

  SUBCASE("singleton") {
    const std::vector<Eigen::Index> played = {4};
    const std::vector<Eigen::Index> pos = {0};
    const NystromDictionary d = nystrom_dictionary(played, pos, g);
    const Eigen::VectorXd phi = nystrom_embed(d, g, 4);
    CHECK(phi.size() == 1);
    CHECK(phi(0) == doctest::Approx(1.0));
  }
  SUBCASE("full grid reproduces the gram matrix") {
    std::vector<Eigen::Index> played(10);
    std::vector<Eigen::Index> pos(10);
    for (int i = 0; i < 10; ++i) played[i] = pos[i] = i;
    const NystromDictionary d = nystrom_dictionary(played, pos, g);
    const Eigen::MatrixXd phi = nystrom_embed_arms(d, g);
    CHECK((phi.transpose() * phi - g).cwiseAbs().maxCoeff() <= 1e-8);
  }
  SUBCASE("members are reproduced and the pseudo-root is a right inverse on the range") {
    const std::vector<Eigen::Index> played = {1, 7, 7, 3, 1, 9};
    const std::vector<Eigen::Index> pos = {0, 1, 2, 4, 5};
    const NystromDictionary d = nystrom_dictionary(played, pos, g);
    CHECK(d.member_arms == std::vector<Eigen::Index>{1, 7, 9});
    CHECK(d.member_indices == std::vector<Eigen::Index>{0, 1, 5});
    for (Eigen::Index a : d.member_arms) {
      CHECK(std::abs(nystrom_embed(d, g, a).squaredNorm() - g(a, a)) <= 1e-8);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(d.member_gram);
    const Eigen::MatrixXd root =
        eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
        eig.eigenvectors().transpose();
    const Eigen::MatrixXd proj = d.root_pinv * root;
    CHECK((proj * d.member_gram - d.member_gram).norm() <= 1e-8);
  }
  SUBCASE("empty dictionary") {
    const std::vector<Eigen::Index> played = {1, 2};
    const NystromDictionary d = nystrom_dictionary(played, {}, g);
    CHECK(d.size() == 0);
    CHECK(nystrom_embed(d, g, 3).size() == 0);
    CHECK(nystrom_embed_arms(d, g).rows() == 0);
  }
}

TEST_CASE("Nystrom sampling probabilities") {
  const ArmSet arms = ArmSet::unit_grid(30);
  const Eigen::MatrixXd g = se_gram(arms, 0.1);
  std::vector<Eigen::Index> played(30);
  std::vector<double> var(30);
  for (int i = 0; i < 30; ++i) {
    played[i] = i;
    var[i] = 0.1 + 0.03 * i;
  }
  Rng rng(42);

  SUBCASE("p = 1 keeps everything") {
    const NystromDictionary d = nystrom_sample(played, var, 1e6, g, rng);
    CHECK(d.size() == 30);
    for (double p : d.inclusion_probabilities) CHECK(p == 1.0);
  }
  SUBCASE("zero variance is never sampled") {
    std::vector<double> v0 = var;
    v0[5] = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
      const NystromDictionary d = nystrom_sample(played, v0, 1e6, g, rng);
      for (Eigen::Index a : d.member_arms) CHECK(a != 5);
    }
  }
  SUBCASE("mean size matches q * sum of variances") {
    const double q = 0.5;
    double expected = 0.0;
    double var_size = 0.0;
    for (double v : var) {
      expected += q * v;
      var_size += q * v * (1.0 - q * v);
    }
    const int reps = 10000;
    double total = 0.0;
    for (int r = 0; r < reps; ++r) total += static_cast<double>(nystrom_sample(played, var, q, g, rng).size());
    const double se = std::sqrt(var_size / reps);
    CHECK(std::abs(total / reps - expected) <= 3.0 * se);
  }
  CHECK_THROWS_AS(nystrom_sample(played, var, 0.0, g, rng), ConfigError);
}

TEST_CASE("approximate posterior") {
  const ArmSet arms = ArmSet::unit_grid(50);
  const Eigen::MatrixXd g = se_gram(arms, 0.2);
  Rng rng(8);
  std::uniform_int_distribution<Eigen::Index> pick(0, 49);
  std::normal_distribution<double> noise;

  SUBCASE("prior") {
    ApproxPosteriorState s(g.diagonal(), 1.0, VarianceVariant::kDeterministicTraining);
    CHECK(s.means().isZero());
    CHECK(s.variances() == g.diagonal());
    const QffEmbedding q(8, 1, 0.2);
    ApproxPosteriorState scaled(g.diagonal(), 1.0, VarianceVariant::kScaled);
    scaled.rebuild(q.embed_arms(arms), {}, {}, TruncationLevel::unlimited());
    for (Eigen::Index a = 0; a < 50; ++a) CHECK(scaled.variance(a) == doctest::Approx(1.0));
    CHECK(scaled.means().isZero());
  }

  SUBCASE("full Nystrom dictionary equals the exact posterior") {
    PosteriorState exact(g, 1.0);
    std::vector<Eigen::Index> played;
    std::vector<double> y;
    ApproxPosteriorState s(g.diagonal(), 1.0, VarianceVariant::kDeterministicTraining);
    for (int t = 1; t <= 50; ++t) {
      const Eigen::Index a = pick(rng);
      const double r = noise(rng);
      played.push_back(a);
      y.push_back(r);
      exact.update(a, r, r);
      std::vector<Eigen::Index> pos(played.size());
      for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = static_cast<Eigen::Index>(i);
      const NystromDictionary d = nystrom_dictionary(played, pos, g);
      s.rebuild(nystrom_embed_arms(d, g), played, y, TruncationLevel::unlimited());
      for (Eigen::Index x = 0; x < 50; ++x) {
        CHECK(std::abs(s.variance(x) - exact.variance(x)) <= 1e-6);
        CHECK(std::abs(s.mean(x) - exact.mean(x)) <= 1e-6);
        CHECK(s.raw_variance(x) >= -1e-10);
      }
    }
  }

  SUBCASE("grouped rebuild matches the dense estimator") {
    const QffEmbedding q(12, 1, 0.2);
    const Eigen::MatrixXd feats = q.embed_arms(arms);
    std::vector<Eigen::Index> played;
    std::vector<double> y;
    for (int t = 0; t < 80; ++t) {
      played.push_back(pick(rng));
      y.push_back(3.0 * noise(rng));
    }
    ApproxPosteriorState s(g.diagonal(), 1.0, VarianceVariant::kScaled);
    for (TruncationLevel b : {TruncationLevel::unlimited(), TruncationLevel::at(0.5)}) {
      s.rebuild(feats, played, y, b);
      const Eigen::MatrixXd phi = s.design_matrix();
      const Eigen::MatrixXd v =
          phi.transpose() * phi + Eigen::MatrixXd::Identity(phi.cols(), phi.cols());
      CHECK((v - s.gram_matrix()).norm() <= 1e-9);
      CHECK((s.inv_sqrt() * v * s.inv_sqrt() - Eigen::MatrixXd::Identity(v.rows(), v.cols())).norm() <= 1e-8);
      CHECK(min_eigenvalue(s.gram_matrix()) >= 1.0 - 1e-10);
      const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), 80);
      const Eigen::VectorXd theta = adaptive_truncate(phi, s.inv_sqrt(), yv, b);
      CHECK((theta - s.theta()).norm() <= 1e-10);
      for (Eigen::Index x = 0; x < 50; ++x) {
        const Eigen::VectorXd f = feats.col(x);
        CHECK(s.mean(x) == doctest::Approx(f.dot(theta)).epsilon(1e-10).scale(1.0));
        CHECK(s.raw_variance(x) == doctest::Approx(f.dot(v.ldlt().solve(f))).epsilon(1e-10));
      }
    }
  }

  SUBCASE("QFF ridge regression recovers a noiseless function") {
    const ArmSet grid = ArmSet::unit_grid(100);
    const double l = 1.0;
    const Eigen::MatrixXd gk = se_gram(grid, l);
    const QffEmbedding q(8, 1, l);
    Eigen::VectorXd f = 0.6 * gk.col(10) - 0.4 * gk.col(70) + 0.3 * gk.col(45);
    std::vector<Eigen::Index> played;
    std::vector<double> y;
    for (int t = 0; t < 30; ++t) {
      const Eigen::Index a = (t * 37) % 100;
      played.push_back(a);
      y.push_back(f(a));
    }
    ApproxPosteriorState s(gk.diagonal(), 1.0, VarianceVariant::kScaled);
    s.rebuild(q.embed_arms(grid), played, y, TruncationLevel::unlimited());

    PosteriorState exact(gk, 1.0);
    for (std::size_t i = 0; i < played.size(); ++i) exact.update(played[i], y[i], y[i]);
    for (Eigen::Index x = 0; x < 100; ++x) {
      CHECK(std::abs(s.mean(x) - exact.mean(x)) <= 0.05);
    }
  }

  SUBCASE("zero rewards give a zero mean") {
    const QffEmbedding q(6, 1, 0.5);
    std::vector<Eigen::Index> played = {1, 2, 3, 3};
    std::vector<double> y(4, 0.0);
    ApproxPosteriorState s(g.diagonal(), 1.0, VarianceVariant::kScaled);
    s.rebuild(q.embed_arms(arms), played, y, TruncationLevel::at(1.0));
    CHECK(s.means().isZero());
  }
}
