#pragma once

// Distribution-free bounds on a leakage score X in [0,1] observed through
// n Monte Carlo samples: binomial upper bound, exceedance bound, expectation
// sandwich, standard-deviation upper bound, and sample-size planning.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "probe/ecdf.hpp"
#include "probe/samples.hpp"
#include "probe/special.hpp"

namespace probe {

// One-sided binomial upper confidence bound on the success probability at
// level 1 - alpha: the (1 - alpha)-quantile of Beta(successes + 1,
// n - successes + 1). successes = n has a degenerate second shape parameter
// and returns exactly 1.
inline double clopper_pearson_upper(std::size_t successes, std::size_t n,
                                    SignificanceLevel alpha) {
    if (n == 0) throw std::domain_error("clopper_pearson_upper requires n >= 1");
    if (successes > n) {
        throw std::domain_error("successes " + std::to_string(successes) + " exceeds n " +
                                std::to_string(n));
    }
    if (successes == n) return 1.0;
    return beta_quantile(1.0 - alpha.value(), static_cast<double>(successes) + 1.0,
                         static_cast<double>(n - successes) + 1.0);
}

// Simultaneous upper bound on Pr(X > x): min(1, 1 - F_n(x) + eps) with the
// one-sided eps. Holds for all x at once with probability >= 1 - alpha.
inline double general_leakage_bound(const SampleSet& samples, SignificanceLevel alpha,
                                    double x) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::domain_error("threshold x must lie in [0,1], got " + std::to_string(x));
    }
    const EmpiricalCdf cdf(samples);
    const double eps = dkw_epsilon(samples.size(), alpha, Sidedness::kOneSided);
    return std::min(1.0, 1.0 - cdf(x) + eps);
}

// High-probability sandwich on E[X].
struct ExpectationBand {
    double mu_lower = 0.0;
    double mu_upper = 1.0;
    Partition partition_used;
    SignificanceLevel alpha;
};

// Riemann sums of the band envelopes over the partition:
//   mu_upper = 1 - sum_{i=0}^{K-1} delta_i * lower(tau_i)      (left sum)
//   mu_lower = 1 - sum_{i=1}^{K}   delta_{i-1} * upper(tau_i)  (right sum)
// Both clamped to [0,1]; mu_lower <= mu_upper holds by monotonicity of the
// envelopes.
inline ExpectationBand expectation_bounds(const CdfBand& band, const Partition& partition,
                                          SignificanceLevel alpha) {
    const auto& knots = partition.knots();
    const std::size_t cells = partition.cells();

    double left_sum = 0.0;
    double right_sum = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
        const double delta = partition.width(i);
        left_sum += delta * band.lower(knots[i]);
        right_sum += delta * band.upper(knots[i + 1]);
    }
    const double mu_upper = std::clamp(1.0 - left_sum, 0.0, 1.0);
    const double mu_lower = std::clamp(1.0 - right_sum, 0.0, 1.0);
    return ExpectationBand{mu_lower, mu_upper, partition, alpha};
}

// Convenience form: builds the two-sided band so that the expectation and
// standard-deviation guarantees hold jointly from one band event.
inline ExpectationBand expectation_bounds(const SampleSet& samples, SignificanceLevel alpha,
                                          const Partition& partition) {
    return expectation_bounds(CdfBand::from_samples(samples, alpha, Sidedness::kTwoSided),
                              partition, alpha);
}

// Upper bound on sqrt(Var[X]). Per cell, eta_i is the worst-case squared
// deviation max_{kappa in {tau_i, tau_i+1}, a in {mu_lower, mu_upper}}
// (kappa - a)^2; with d_i = eta_{i-1} - eta_i the bound is
//   sigma^2 <= eta_{K-1} - eta_0 * lower(tau_0)
//             + sum_{i=1}^{K-1} d_i * (d_i >= 0 ? upper(tau_i) : lower(tau_i))
// floored at 0 before the square root.
inline double std_dev_upper(const CdfBand& band, const Partition& partition,
                            const ExpectationBand& expectation) {
    if (!(expectation.partition_used == partition)) {
        throw std::domain_error("std_dev_upper: expectation band uses a different partition");
    }
    const auto& knots = partition.knots();
    const std::size_t cells = partition.cells();

    std::vector<double> eta(cells);
    for (std::size_t i = 0; i < cells; ++i) {
        double worst = 0.0;
        for (double kappa : {knots[i], knots[i + 1]}) {
            for (double a : {expectation.mu_lower, expectation.mu_upper}) {
                worst = std::max(worst, (kappa - a) * (kappa - a));
            }
        }
        eta[i] = worst;
    }

    double var_bound = eta[cells - 1] - eta[0] * band.lower(knots[0]);
    for (std::size_t i = 1; i < cells; ++i) {
        const double d = eta[i - 1] - eta[i];
        var_bound += d * (d >= 0.0 ? band.upper(knots[i]) : band.lower(knots[i]));
    }
    return std::sqrt(std::max(0.0, var_bound));
}

// Rebuilds the two-sided band; the expectation band must come from the same
// samples, alpha, and partition.
inline double std_dev_upper(const SampleSet& samples, SignificanceLevel alpha,
                            const Partition& partition, const ExpectationBand& expectation) {
    if (expectation.alpha.value() != alpha.value()) {
        throw std::domain_error("std_dev_upper: expectation band uses a different alpha");
    }
    return std_dev_upper(CdfBand::from_samples(samples, alpha, Sidedness::kTwoSided), partition,
                         expectation);
}

// Smallest n with dkw_epsilon(n, alpha, sidedness) <= epsilon. The closed
// form ceil(ln(c/alpha) / (2 eps^2)) seeds the search; the result is then
// adjusted against dkw_epsilon itself so minimality is exact.
inline std::size_t sample_size_for(double epsilon, SignificanceLevel alpha,
                                   Sidedness sidedness) {
    if (!(epsilon > 0.0)) throw std::domain_error("sample_size_for requires epsilon > 0");
    const double c = sidedness == Sidedness::kOneSided ? 1.0 : 2.0;
    const double raw = std::log(c / alpha.value()) / (2.0 * epsilon * epsilon);
    std::size_t n = raw < 1.0 ? 1 : static_cast<std::size_t>(std::ceil(raw));
    while (n > 1 && dkw_epsilon(n - 1, alpha, sidedness) <= epsilon) --n;
    while (dkw_epsilon(n, alpha, sidedness) > epsilon) ++n;
    return n;
}

}  // namespace probe
