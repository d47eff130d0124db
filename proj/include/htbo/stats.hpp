#pragma once

#include <span>

namespace htbo {

struct KsResult {
  double statistic = 0.0;  // sup |F_n - Phi((x - mean)/sd)|
  double p_value = 1.0;    // asymptotic Kolmogorov approximation
  long n = 0;
};

/// Two-sided KS test of normality against the Gaussian fitted by the
/// samples' own mean and (unbiased) variance. The p-value uses the
/// asymptotic Kolmogorov law with Stephens' finite-n correction and no
/// Lilliefors table, so it is conservative for fitted parameters.
/// Throws InputError for fewer than 20 samples or zero variance.
KsResult ks_normality(std::span<const double> samples);

/// P(K > x) for the Kolmogorov distribution.
double kolmogorov_survival(double x);

}  // namespace htbo
