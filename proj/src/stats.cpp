#include "htbo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "htbo/errors.hpp"

namespace htbo {

double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 1.18) {
    // Small-x series: P(K <= x) = sqrt(2 pi)/x sum exp(-(2k-1)^2 pi^2 / (8 x^2)).
    const double c = -std::numbers::pi * std::numbers::pi / (8.0 * x * x);
    double cdf = 0.0;
    for (int k = 1; k <= 6; ++k) {
      const double j = 2.0 * k - 1.0;
      cdf += std::exp(j * j * c);
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / x;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_normality(std::span<const double> samples) {
  const auto n = static_cast<long>(samples.size());
  if (n < 20) throw InputError("ks: need at least 20 samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());

  double mean = 0.0;
  for (double x : sorted) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : sorted) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) throw InputError("ks: samples have zero variance");

  const double nd = static_cast<double>(n);
  double d = 0.0;
  for (long i = 0; i < n; ++i) {
    const double z = (sorted[static_cast<std::size_t>(i)] - mean) / sd;
    const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
    d = std::max({d, (static_cast<double>(i) + 1.0) / nd - cdf, cdf - static_cast<double>(i) / nd});
  }
  KsResult out;
  out.statistic = d;
  out.n = n;
  const double root_n = std::sqrt(nd);
  out.p_value = kolmogorov_survival((root_n + 0.12 + 0.11 / root_n) * d);
  return out;
}

}  // namespace htbo
