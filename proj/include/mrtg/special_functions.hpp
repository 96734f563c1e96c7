#pragma once

namespace mrtg::special {

/// Regularized lower incomplete gamma P(a, x).
double igam(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), the
/// chi-squared survival function used by the randomness tests.
/// Requires a > 0 and x >= 0.
double igamc(double a, double x);

/// Complementary error function (delegates to std::erfc).
double erfc(double x);

/// Standard normal CDF.
double normal_cdf(double x);

}  // namespace mrtg::special
