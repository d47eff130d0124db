#include "htbo/hermite.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "htbo/errors.hpp"

namespace htbo {
namespace {

// h_k = H_k / sqrt(2^k k!), so that h_k^2 integrates to one against
// exp(-z^2)/sqrt(pi). Returns {h_n(z), h_{n-1}(z)}.
std::pair<double, double> normalized_hermite(int n, double z) {
  double prev = 0.0;
  double cur = 1.0;
  for (int k = 1; k <= n; ++k) {
    const double next = std::sqrt(2.0 / k) * z * cur - std::sqrt((k - 1.0) / k) * prev;
    prev = cur;
    cur = next;
  }
  return {cur, prev};
}

}  // namespace

double hermite_polynomial(int n, double z) {
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = 2.0 * z;
  for (int k = 2; k <= n; ++k) {
    const double next = 2.0 * z * cur - 2.0 * (k - 1) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

HermiteRule hermite_nodes_weights(int order) {
  if (order < 1 || order > 64) {
    throw ConfigError("hermite_nodes_weights: order must be in [1, 64], got " +
                      std::to_string(order));
  }
  const int n = order;
  const int half = (n + 1) / 2;
  std::vector<double> upper(static_cast<std::size_t>(half));  // descending positive roots

  double z = 0.0;
  for (int i = 0; i < half; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * upper[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * upper[1];
    } else {
      z = 2.0 * z - upper[static_cast<std::size_t>(i - 2)];
    }
    if (n == 1) z = 0.0;

    bool converged = false;
    for (int iter = 0; iter < 100; ++iter) {
      const auto [hn, hn1] = normalized_hermite(n, z);
      const double step = hn / (std::sqrt(2.0 * n) * hn1);
      z -= step;
      if (std::abs(step) <= 1e-13) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw NumericError("hermite_nodes_weights: Newton did not converge for root " +
                         std::to_string(i) + " of order " + std::to_string(n));
    }
    upper[static_cast<std::size_t>(i)] = z;
  }

  HermiteRule rule;
  rule.roots.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < half; ++i) {
    const double r = upper[static_cast<std::size_t>(i)];
    rule.roots[static_cast<std::size_t>(i)] = -r;
    rule.roots[static_cast<std::size_t>(n - 1 - i)] = r;
  }
  if (n % 2 == 1) rule.roots[static_cast<std::size_t>(half - 1)] = 0.0;
  std::sort(rule.roots.begin(), rule.roots.end());

  // 2^{n-1} n! / (n^2 H_{n-1}^2) = 1 / (n h_{n-1}^2) with the normalized h.
  rule.weights.resize(rule.roots.size());
  for (std::size_t i = 0; i < rule.roots.size(); ++i) {
    const double h = normalized_hermite(n - 1, rule.roots[i]).first;
    rule.weights[i] = 1.0 / (n * h * h);
  }
  return rule;
}

}  // namespace htbo
