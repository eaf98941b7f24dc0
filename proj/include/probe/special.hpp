#pragma once

// Beta-distribution numerics: regularized incomplete beta via Lentz's
// continued fraction with the symmetry transformation, and its inverse via
// a safeguarded Newton/bisection hybrid.

#include <cmath>
#include <stdexcept>
#include <string>

#include "probe/errors.hpp"

namespace probe {

inline double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace detail {

// Continued fraction for the incomplete beta, evaluated with Lentz's
// algorithm. Valid (and fast) for x < (a+1)/(a+b+2).
inline double beta_cont_fraction(double a, double b, double x) {
    constexpr double kTiny = 1e-30;
    constexpr double kEps = 3e-16;
    constexpr int kMaxIter = 1000;

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

        if (std::abs(del - 1.0) < kEps) return h;
    }
    throw NumericalError("incomplete beta continued fraction did not converge: a=" +
                         std::to_string(a) + " b=" + std::to_string(b) + " x=" +
                         std::to_string(x));
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b), the CDF of Beta(a, b) at x.
inline double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw std::domain_error("incomplete beta requires positive shape parameters");
    }
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;

    const double log_front =
        a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);

    // I_x(a,b) = 1 - I_{1-x}(b,a); pick the side where the fraction converges.
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return std::exp(log_front) * detail::beta_cont_fraction(a, b, x) / a;
    }
    return 1.0 - std::exp(log_front) * detail::beta_cont_fraction(b, a, 1.0 - x) / b;
}

// Density of Beta(a, b); used as the Newton derivative below.
inline double beta_pdf(double a, double b, double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta(a, b));
}

// Quantile of Beta(a, b): the x with I_x(a, b) = p. Newton steps from the
// mean, falling back to bisection whenever a step leaves the bracket.
// Converges on |I_x - p| <= 1e-12 with an iteration cap of 200.
inline double beta_quantile(double p, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw std::domain_error("beta quantile requires positive shape parameters");
    }
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;

    constexpr double kCdfTol = 1e-12;
    constexpr int kMaxIter = 200;

    // Sub-tolerance tail probabilities are already met at the endpoint.
    if (p <= kCdfTol) return 0.0;
    if (p >= 1.0 - kCdfTol) return 1.0;

    double lo = 0.0;
    double hi = 1.0;
    double x = a / (a + b);
    // Deep in a tail the small-x asymptotic I_x ~ x^a / (a B(a,b)) (and its
    // mirror image) gives a far better start than the mean.
    const double lb = log_beta(a, b);
    if (p < 0.1) {
        const double t = std::exp((std::log(p) + std::log(a) + lb) / a);
        if (t > 0.0 && t < 1.0) x = t;
    } else if (p > 0.9) {
        const double t = std::exp((std::log1p(-p) + std::log(b) + lb) / b);
        if (t > 0.0 && t < 1.0) x = 1.0 - t;
    }
    double f = regularized_incomplete_beta(a, b, x) - p;

    for (int it = 0; it < kMaxIter; ++it) {
        if (std::abs(f) <= kCdfTol) return x;
        if (f > 0.0) {
            hi = x;
        } else {
            lo = x;
        }

        const double deriv = beta_pdf(a, b, x);
        double next = deriv > 0.0 && std::isfinite(deriv) ? x - f / deriv : 0.5 * (lo + hi);
        if (!(next > lo) || !(next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (next == x) {
            next = 0.5 * (lo + hi);
            if (next == x) {
                // Bracket exhausted at double precision.
                return x;
            }
        }
        x = next;
        f = regularized_incomplete_beta(a, b, x) - p;
    }
    throw NumericalError("beta quantile inversion did not converge: p=" + std::to_string(p) +
                         " a=" + std::to_string(a) + " b=" + std::to_string(b) +
                         " last x=" + std::to_string(x) + " residual=" + std::to_string(f));
}

}  // namespace probe
