#pragma once

// Empirical CDF plus the distribution-free confidence band around it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "probe/samples.hpp"

namespace probe {

enum class Sidedness { kOneSided, kTwoSided };

inline const char* sidedness_name(Sidedness s) {
    return s == Sidedness::kOneSided ? "one-sided" : "two-sided";
}

// Band half-width at confidence 1 - alpha:
//   one-sided  sqrt(ln(1/alpha) / (2n))
//   two-sided  sqrt(ln(2/alpha) / (2n))
// Both respect the validity floor sqrt(ln 2 / (2n)) for alpha <= 1/2.
inline double dkw_epsilon(std::size_t n, SignificanceLevel alpha, Sidedness sidedness) {
    if (n == 0) throw std::domain_error("dkw_epsilon requires n >= 1");
    const double c = sidedness == Sidedness::kOneSided ? 1.0 : 2.0;
    return std::sqrt(std::log(c / alpha.value()) / (2.0 * static_cast<double>(n)));
}

// Right-continuous step function x -> (1/n) #{X_i <= x}.
class EmpiricalCdf {
public:
    explicit EmpiricalCdf(const SampleSet& samples) : sorted_(samples.sorted()) {}

    double operator()(double x) const {
        const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
        return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
    }

    const std::vector<double>& support() const { return sorted_; }
    std::size_t sample_count() const { return sorted_.size(); }

private:
    std::vector<double> sorted_;
};

// Empirical CDF with envelopes clamp(F_n(x) -/+ epsilon, 0, 1). Construct via
// from_samples for a DKW-calibrated band; direct construction admits any
// epsilon >= 0 (tests inject epsilon = 0).
struct CdfBand {
    EmpiricalCdf base;
    double epsilon = 0.0;
    Sidedness sidedness = Sidedness::kTwoSided;

    static CdfBand from_samples(const SampleSet& samples, SignificanceLevel alpha,
                                Sidedness sidedness) {
        return CdfBand{EmpiricalCdf(samples), dkw_epsilon(samples.size(), alpha, sidedness),
                       sidedness};
    }

    double lower(double x) const { return std::clamp(base(x) - epsilon, 0.0, 1.0); }
    double upper(double x) const { return std::clamp(base(x) + epsilon, 0.0, 1.0); }
};

}  // namespace probe
