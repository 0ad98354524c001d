#pragma once

namespace purify {

// Standard normal CDF, computed as erfc(-x/sqrt(2))/2; absolute error is a
// few ulp (well under 1e-12 everywhere).
double norm_cdf(double x);

// log(norm_cdf(x)) with an asymptotic branch for deep negative x, so the
// result stays finite and accurate far beyond where norm_cdf underflows.
double norm_cdf_log(double x);

// Inverse standard normal CDF: Acklam's rational approximation polished by
// two Halley iterations against norm_cdf; |error| < 1e-12 over (0, 1).
double norm_quantile(double p);

// Regularized incomplete beta I_x(a, b) via the Lentz continued fraction.
double reg_inc_beta(double a, double b, double x);

// Solves I_x(a, b) = p for x by bisection.
double beta_quantile(double p, double a, double b);

// One-sided lower Clopper-Pearson confidence bound for a binomial
// proportion with k successes in n trials: the alpha-quantile of
// Beta(k, n-k+1); 0 when k == 0.
double clopper_pearson_lower(long k, long n, double alpha);

// Exact two-sided binomial test p-value for H0: p = 1/2.
double binom_two_sided_pvalue_half(long k, long n);

}  // namespace purify
