#pragma once

#include <vector>

namespace htbo {

/// Roots of the physicists' Hermite polynomial H_n and the matching
/// quadrature weights normalized to sum to one, i.e. weights for the
/// probability density exp(-z^2) / sqrt(pi).
struct HermiteRule {
  std::vector<double> roots;    // increasing
  std::vector<double> weights;  // 2^{n-1} n! / (n^2 H_{n-1}(z)^2)
};

/// Newton iteration on the normalized three-term recurrence, started from
/// the usual asymptotic root estimates. Supports 1 <= order <= 64; throws
/// ConfigError outside that range and NumericError if Newton fails to reach
/// 1e-13 within 100 iterations.
HermiteRule hermite_nodes_weights(int order);

/// H_n(z) by the three-term recurrence (unnormalized; overflows for large n).
double hermite_polynomial(int n, double z);

}  // namespace htbo
