#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "probe/bounds.hpp"
#include "probe/ecdf.hpp"
#include "probe/rng.hpp"
#include "probe/samples.hpp"
#include "probe/special.hpp"

using namespace probe;

namespace {

const SignificanceLevel kAlpha01{0.01};

SampleSet constant_samples(double value, std::size_t n) {
    return SampleSet(std::vector<double>(n, value));
}

}  // namespace

TEST_CASE("clopper_pearson_upper closed forms") {
    // successes = n is the degenerate case and returns exactly 1.
    REQUIRE(clopper_pearson_upper(10, 10, kAlpha01) == 1.0);
    REQUIRE(clopper_pearson_upper(1, 1, SignificanceLevel(0.5)) == 1.0);

    // successes = 0: quantile of Beta(1, n+1), closed form 1 - alpha^(1/(n+1)).
    for (std::size_t n : {10u, 100u, 1024u}) {
        for (double a : {0.01, 0.05}) {
            const double expected = 1.0 - std::pow(a, 1.0 / (n + 1.0));
            REQUIRE(clopper_pearson_upper(0, n, SignificanceLevel(a)) ==
                    Catch::Approx(expected).margin(1e-9));
        }
    }
    REQUIRE(clopper_pearson_upper(0, 1024, kAlpha01) ==
            Catch::Approx(0.004482771214290637).margin(1e-9));
}

TEST_CASE("clopper_pearson_upper interior value") {
    const double bound = clopper_pearson_upper(5, 100, kAlpha01);
    // The returned bound solves I_v(6, 96) = 0.99.
    REQUIRE(regularized_incomplete_beta(6.0, 96.0, bound) == Catch::Approx(0.99).margin(1e-9));
    REQUIRE(bound == Catch::Approx(0.124656196185).margin(1e-9));
}

TEST_CASE("clopper_pearson_upper monotonicity") {
    const std::size_t n = 50;
    double prev = -1.0;
    for (std::size_t s = 0; s <= n; ++s) {
        const double b = clopper_pearson_upper(s, n, SignificanceLevel(0.05));
        REQUIRE(b > prev);
        prev = b;
    }
    // Fixed ratio, growing n: the bound tightens.
    for (double ratio : {0.0, 0.1, 0.5, 0.9}) {
        double prev_bound = 1.0;
        for (std::size_t n2 : {10u, 20u, 50u, 100u, 200u, 1000u}) {
            const auto s = static_cast<std::size_t>(ratio * n2 + 0.5);
            const double b = clopper_pearson_upper(s, n2, kAlpha01);
            REQUIRE(b <= prev_bound + 1e-12);
            prev_bound = b;
        }
    }
}

TEST_CASE("clopper_pearson_upper domain errors") {
    REQUIRE_THROWS_AS(clopper_pearson_upper(11, 10, kAlpha01), std::domain_error);
    REQUIRE_THROWS_AS(clopper_pearson_upper(0, 0, kAlpha01), std::domain_error);
}

TEST_CASE("dkw_epsilon values and scaling") {
    REQUIRE(dkw_epsilon(1024, kAlpha01, Sidedness::kOneSided) ==
            Catch::Approx(0.047419597793).margin(1e-9));
    REQUIRE(dkw_epsilon(1024, kAlpha01, Sidedness::kTwoSided) ==
            Catch::Approx(0.050863238460).margin(1e-9));

    // eps ~ n^(-1/2): quadrupling n halves the half-width.
    for (std::size_t n : {7u, 128u, 5000u}) {
        REQUIRE(dkw_epsilon(n, kAlpha01, Sidedness::kOneSided) ==
                Catch::Approx(2.0 * dkw_epsilon(4 * n, kAlpha01, Sidedness::kOneSided))
                    .margin(1e-14));
    }

    // Validity floor sqrt(ln 2 / (2n)) across admissible alpha.
    for (double a : {0.5, 0.1, 0.01}) {
        for (std::size_t n : {1u, 10u, 1000u}) {
            const double floor = std::sqrt(std::log(2.0) / (2.0 * n));
            REQUIRE(dkw_epsilon(n, SignificanceLevel(a), Sidedness::kOneSided) >= floor - 1e-15);
            REQUIRE(dkw_epsilon(n, SignificanceLevel(a), Sidedness::kTwoSided) >= floor - 1e-15);
        }
    }
    REQUIRE_THROWS_AS(dkw_epsilon(0, kAlpha01, Sidedness::kOneSided), std::domain_error);
}

TEST_CASE("general_leakage_bound examples") {
    const SampleSet zeros = constant_samples(0.0, 1024);
    const double eps1 = dkw_epsilon(1024, kAlpha01, Sidedness::kOneSided);

    // F_n(0) = 1 for all-zero samples, so the bound at 0 is exactly eps.
    REQUIRE(general_leakage_bound(zeros, kAlpha01, 0.0) == Catch::Approx(eps1).margin(1e-12));

    // F_n(1) = 1 always, so the bound at 1 is min(1, eps).
    CounterRng rng(3);
    std::vector<double> vals(40);
    for (double& v : vals) v = rng.next_double();
    const SampleSet random_samples(vals);
    REQUIRE(general_leakage_bound(random_samples, kAlpha01, 1.0) ==
            Catch::Approx(std::min(1.0, dkw_epsilon(40, kAlpha01, Sidedness::kOneSided)))
                .margin(1e-12));

    REQUIRE_THROWS_AS(general_leakage_bound(zeros, kAlpha01, 1.5), std::domain_error);
    REQUIRE_THROWS_AS(general_leakage_bound(zeros, kAlpha01, -0.1), std::domain_error);
}

TEST_CASE("general_leakage_bound is a non-increasing function of x in [0,1]") {
    CounterRng rng(17);
    std::vector<double> vals(200);
    for (double& v : vals) v = rng.next_double() * rng.next_double();
    const SampleSet samples(vals);
    double prev = 2.0;
    for (int i = 0; i <= 50; ++i) {
        const double b = general_leakage_bound(samples, kAlpha01, i / 50.0);
        REQUIRE(b >= 0.0);
        REQUIRE(b <= 1.0);
        REQUIRE(b <= prev + 1e-15);
        prev = b;
    }
}

TEST_CASE("expectation_bounds on degenerate all-zero samples") {
    const SampleSet zeros = constant_samples(0.0, 1024);
    const Partition unit = Partition::uniform(1);
    const ExpectationBand band = expectation_bounds(zeros, kAlpha01, unit);
    const double eps2 = dkw_epsilon(1024, kAlpha01, Sidedness::kTwoSided);
    REQUIRE(band.mu_upper == Catch::Approx(eps2).margin(1e-12));
    REQUIRE(band.mu_lower == 0.0);
}

TEST_CASE("expectation_bounds sandwich and refinement") {
    CounterRng rng(99);
    std::vector<double> vals(500);
    for (double& v : vals) v = rng.next_double();
    const SampleSet samples(vals);

    const ExpectationBand coarse = expectation_bounds(samples, kAlpha01, Partition::uniform(10));
    const ExpectationBand fine = expectation_bounds(samples, kAlpha01, Partition::uniform(20));
    REQUIRE(coarse.mu_lower <= coarse.mu_upper);
    REQUIRE(fine.mu_lower <= fine.mu_upper);
    // Refining a nested partition tightens both ends.
    REQUIRE(fine.mu_upper <= coarse.mu_upper + 1e-12);
    REQUIRE(fine.mu_lower >= coarse.mu_lower - 1e-12);
}

TEST_CASE("expectation_bounds with zero epsilon closes onto the Riemann gap") {
    CounterRng rng(5);
    std::vector<double> vals(64);
    for (double& v : vals) v = rng.next_double();
    const SampleSet samples(vals);
    const Partition partition = Partition::adapted(samples);
    const CdfBand exact_band{EmpiricalCdf(samples), 0.0, Sidedness::kTwoSided};

    const ExpectationBand band = expectation_bounds(exact_band, partition, kAlpha01);
    REQUIRE(band.mu_lower <= samples.mean() + 1e-12);
    REQUIRE(band.mu_upper >= samples.mean() - 1e-12);
    REQUIRE(band.mu_upper - band.mu_lower <= partition.max_width() + 1e-12);
}

TEST_CASE("std_dev_upper hand-computed K=1 case") {
    const SampleSet halves = constant_samples(0.5, 16);
    const Partition unit = Partition::uniform(1);
    const CdfBand exact_band{EmpiricalCdf(halves), 0.0, Sidedness::kTwoSided};
    const ExpectationBand point{0.5, 0.5, unit, kAlpha01};
    // eta_0 = 0.25 and F_lower(0) = 0, so sigma = sqrt(0.25).
    REQUIRE(std_dev_upper(exact_band, unit, point) == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("std_dev_upper dominates the plug-in sd on enumerated small instances") {
    // Every multiset of size <= 8 over scores {0, 0.5, 1}, zero-epsilon band,
    // partition knots at all sample values.
    for (std::size_t n = 1; n <= 8; ++n) {
        for (std::size_t zeros = 0; zeros <= n; ++zeros) {
            for (std::size_t halves = 0; zeros + halves <= n; ++halves) {
                std::vector<double> vals;
                vals.insert(vals.end(), zeros, 0.0);
                vals.insert(vals.end(), halves, 0.5);
                vals.insert(vals.end(), n - zeros - halves, 1.0);
                const SampleSet samples(vals);
                const Partition partition = Partition::adapted(samples);
                const CdfBand band{EmpiricalCdf(samples), 0.0, Sidedness::kTwoSided};
                const ExpectationBand mu = expectation_bounds(band, partition, kAlpha01);
                const double sigma = std_dev_upper(band, partition, mu);
                REQUIRE(sigma >= samples.population_sd() - 1e-12);
            }
        }
    }
}

TEST_CASE("std_dev_upper vanishes with n on a degenerate distribution") {
    // All mass at 0: the bound is pure band slack and must shrink as n grows.
    const Partition partition = Partition::uniform(1000);
    double prev = 2.0;
    for (std::size_t n : {1000u, 10000u, 100000u}) {
        const SampleSet zeros = constant_samples(0.0, n);
        const ExpectationBand band = expectation_bounds(zeros, kAlpha01, partition);
        const double sigma = std_dev_upper(zeros, kAlpha01, partition, band);
        REQUIRE(sigma < prev);
        prev = sigma;
    }
}

TEST_CASE("std_dev_upper rejects mismatched inputs") {
    const SampleSet samples = constant_samples(0.25, 32);
    const Partition p10 = Partition::uniform(10);
    const Partition p20 = Partition::uniform(20);
    const ExpectationBand band = expectation_bounds(samples, kAlpha01, p10);
    REQUIRE_THROWS_AS(std_dev_upper(samples, kAlpha01, p20, band), std::domain_error);
    REQUIRE_THROWS_AS(std_dev_upper(samples, SignificanceLevel(0.05), p10, band),
                      std::domain_error);
    REQUIRE_NOTHROW(std_dev_upper(samples, kAlpha01, p10, band));
}

TEST_CASE("sample_size_for closed forms and minimality") {
    REQUIRE(sample_size_for(0.05, kAlpha01, Sidedness::kTwoSided) == 1060);

    // Inverts dkw_epsilon exactly at its own output.
    const double eps = dkw_epsilon(1024, kAlpha01, Sidedness::kOneSided);
    REQUIRE(sample_size_for(eps, kAlpha01, Sidedness::kOneSided) == 1024);

    // Halving epsilon quadruples n up to ceiling effects.
    const auto n1 = sample_size_for(0.04, kAlpha01, Sidedness::kTwoSided);
    const auto n2 = sample_size_for(0.02, kAlpha01, Sidedness::kTwoSided);
    REQUIRE(n2 >= 4 * n1 - 4);
    REQUIRE(n2 <= 4 * n1 + 1);

    CounterRng rng(23);
    for (int i = 0; i < 200; ++i) {
        const double e = 0.005 + 0.5 * rng.next_double();
        const SignificanceLevel a(0.001 + 0.499 * rng.next_double());
        const auto sided = rng.next_u64() % 2 == 0 ? Sidedness::kOneSided : Sidedness::kTwoSided;
        const std::size_t n = sample_size_for(e, a, sided);
        REQUIRE(dkw_epsilon(n, a, sided) <= e);
        if (n > 1) REQUIRE(dkw_epsilon(n - 1, a, sided) > e);
    }
    REQUIRE_THROWS_AS(sample_size_for(0.0, kAlpha01, Sidedness::kOneSided), std::domain_error);
}

TEST_CASE("core types validate their invariants") {
    REQUIRE_THROWS_AS(SampleSet(std::vector<double>{}), std::domain_error);
    REQUIRE_THROWS_AS(SampleSet(std::vector<double>{0.5, 1.2}), std::domain_error);
    REQUIRE_THROWS_AS(SampleSet(std::vector<double>{-0.1}), std::domain_error);
    REQUIRE_THROWS_AS(SignificanceLevel(0.0), std::domain_error);
    REQUIRE_THROWS_AS(SignificanceLevel(0.6), std::domain_error);
    REQUIRE_NOTHROW(SignificanceLevel(0.5));
    REQUIRE_THROWS_AS(Partition(std::vector<double>{0.0, 0.5}), std::domain_error);
    REQUIRE_THROWS_AS(Partition(std::vector<double>{0.0, 0.7, 0.3, 1.0}), std::domain_error);

    const SampleSet s(std::vector<double>{0.5, 0.25, 0.5, 1.0});
    REQUIRE(s.sorted() == std::vector<double>{0.25, 0.5, 0.5, 1.0});
    REQUIRE(s.values() == std::vector<double>{0.5, 0.25, 0.5, 1.0});
    const Partition adapted = Partition::adapted(s);
    REQUIRE(adapted.knots() == std::vector<double>{0.0, 0.25, 0.5, 1.0});
}

TEST_CASE("cdf band invariants") {
    CounterRng rng(41);
    std::vector<double> vals(100);
    for (double& v : vals) v = rng.next_double();
    const SampleSet samples(vals);
    const CdfBand band = CdfBand::from_samples(samples, kAlpha01, Sidedness::kTwoSided);

    double prev_lower = -1.0, prev_upper = -1.0;
    for (int i = 0; i <= 30; ++i) {
        const double x = i / 30.0;
        REQUIRE(band.lower(x) <= band.base(x));
        REQUIRE(band.base(x) <= band.upper(x));
        REQUIRE(band.lower(x) >= 0.0);
        REQUIRE(band.upper(x) <= 1.0);
        REQUIRE(band.lower(x) >= prev_lower);
        REQUIRE(band.upper(x) >= prev_upper);
        prev_lower = band.lower(x);
        prev_upper = band.upper(x);
    }
    REQUIRE(band.base(1.0) == 1.0);
    REQUIRE(EmpiricalCdf(samples)(-0.01) == 0.0);
}

TEST_CASE("two-sided band covers an analytic CDF at grid points") {
    // Beta(2,5) truth; 2,000 seeded trials at n=500 must cover the analytic
    // CDF at 21 grid points simultaneously in all but ~alpha of trials.
    const int trials = 2000;
    const std::size_t n = 500;
    int misses = 0;
    std::vector<double> draws(n);
    for (int t = 0; t < trials; ++t) {
        CounterRng rng(771, t);
        for (double& v : draws) v = beta_quantile(rng.next_double(), 2.0, 5.0);
        const SampleSet samples(draws);
        const CdfBand band = CdfBand::from_samples(samples, kAlpha01, Sidedness::kTwoSided);
        bool ok = true;
        for (int j = 0; j <= 20; ++j) {
            const double x = j / 20.0;
            const double truth = regularized_incomplete_beta(2.0, 5.0, x);
            ok = ok && band.lower(x) <= truth && truth <= band.upper(x);
        }
        misses += !ok;
    }
    const double limit = 0.01 + 3.0 * std::sqrt(0.01 / trials);
    REQUIRE(static_cast<double>(misses) / trials <= limit);
}
