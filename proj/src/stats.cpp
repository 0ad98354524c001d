#include "purify/stats.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "purify/errors.hpp"

namespace purify {

namespace {
constexpr double kSqrt2 = 1.4142135623730950488016887242097;
constexpr double kSqrt2Pi = 2.5066282746310005024157652848110;
}  // namespace

double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double norm_cdf_log(double x) {
    if (x > -8.0) return std::log(norm_cdf(x));
    // Asymptotic expansion of the Mills ratio: Phi(-y) ~ phi(y)/y * (1 - 1/y^2 + 3/y^4 - ...).
    const double y = -x;
    const double y2 = y * y;
    const double series = 1.0 - 1.0 / y2 + 3.0 / (y2 * y2) - 15.0 / (y2 * y2 * y2);
    return -0.5 * y2 - std::log(y * kSqrt2Pi) + std::log(series);
}

namespace {

// Acklam's inverse normal CDF approximation (central + tail rational fits).
double acklam(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace

double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw ParameterError("norm_quantile: p " + std::to_string(p) + " outside (0, 1)");
    }
    double x = acklam(p);
    // Halley refinement. Work on the smaller tail so the residual Phi - p is
    // well conditioned.
    for (int iter = 0; iter < 2; ++iter) {
        double err;
        if (p < 0.5) {
            err = norm_cdf(x) - p;
        } else {
            // 1 - p is exact for p >= 0.5; compare upper tails.
            err = (1.0 - p) - norm_cdf(-x);
        }
        const double u = err * kSqrt2Pi * std::exp(0.5 * x * x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    return x;
}

namespace {

// Continued fraction for the incomplete beta (Lentz's method).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double reg_inc_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw ParameterError("reg_inc_beta: a, b must be > 0 (got a = " + std::to_string(a) +
                             ", b = " + std::to_string(b) + ")");
    }
    if (!(x >= 0.0 && x <= 1.0)) {
        throw ParameterError("reg_inc_beta: x " + std::to_string(x) + " outside [0, 1]");
    }
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double beta_quantile(double p, double a, double b) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ParameterError("beta_quantile: p " + std::to_string(p) + " outside [0, 1]");
    }
    if (p == 0.0) return 0.0;
    if (p == 1.0) return 1.0;
    double lo = 0.0, hi = 1.0;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (reg_inc_beta(a, b, mid) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double clopper_pearson_lower(long k, long n, double alpha) {
    if (n < 1 || k < 0 || k > n) {
        throw ParameterError("clopper_pearson_lower: k " + std::to_string(k) +
                             " outside [0, n] with n = " + std::to_string(n));
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ParameterError("clopper_pearson_lower: alpha " + std::to_string(alpha) +
                             " outside (0, 1)");
    }
    if (k == 0) return 0.0;
    if (k == n) return std::pow(alpha, 1.0 / static_cast<double>(n));
    return beta_quantile(alpha, static_cast<double>(k), static_cast<double>(n - k + 1));
}

double binom_two_sided_pvalue_half(long k, long n) {
    if (n < 1 || k < 0 || k > n) {
        throw ParameterError("binom_two_sided_pvalue_half: k " + std::to_string(k) +
                             " outside [0, n] with n = " + std::to_string(n));
    }
    // Under p = 1/2 the pmf is symmetric, so the two-sided p-value is the
    // mass of both tails at distance >= |k - n/2|.
    const long kmax = std::max(k, n - k);
    if (2 * kmax == n) return 1.0;
    // P(X >= kmax) = I_{1/2}(kmax, n - kmax + 1)
    const double tail = reg_inc_beta(static_cast<double>(kmax),
                                     static_cast<double>(n - kmax + 1), 0.5);
    return std::min(1.0, 2.0 * tail);
}

}  // namespace purify
