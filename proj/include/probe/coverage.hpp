#pragma once

// Seeded Monte Carlo harness certifying the distribution-free bounds against
// distributions with known CDFs and moments, plus an exact enumeration mode
// for tiny discrete instances and a tightness sweep over n and K.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "probe/bounds.hpp"
#include "probe/distributions.hpp"
#include "probe/ecdf.hpp"
#include "probe/rng.hpp"
#include "probe/samples.hpp"

namespace probe::sim {

inline constexpr int kGenGridPoints = 21;  // thresholds j/20, j = 0..20

// One metric's tally across trials. A violation is a bound falling below the
// truth (or the expectation band excluding it); gap is bound minus truth.
struct MetricCoverage {
    bool applicable = true;
    long violations = 0;
    double mean_gap = 0.0;
};

struct TrialReport {
    std::string dist;
    std::size_t n = 0;
    double alpha = 0.0;
    std::size_t partition_cells = 0;
    long trials = 0;
    std::uint64_t seed = 0;
    std::string rng_name = CounterRng::kName;

    MetricCoverage bin;    // binomial upper bound vs Pr(X = 1)
    MetricCoverage gen;    // exceedance bound vs Pr(X > x) on the grid
    MetricCoverage mu;     // expectation band vs E[X]
    MetricCoverage sigma;  // sd upper bound vs sd[X]
    double mean_mu_width = 0.0;
    std::string notice;

    nlohmann::json to_json() const {
        const auto metric = [&](const MetricCoverage& m) {
            nlohmann::json j;
            j["applicable"] = m.applicable;
            if (m.applicable) {
                j["violations"] = m.violations;
                j["violation_fraction"] =
                    static_cast<double>(m.violations) / static_cast<double>(trials);
                j["mean_gap"] = m.mean_gap;
            }
            return j;
        };
        nlohmann::json j;
        j["schema"] = "probe-bounds/1";
        j["kind"] = "coverage";
        j["config"] = {{"dist", dist},        {"n", n},
                       {"alpha", alpha},      {"partition_k", partition_cells},
                       {"trials", trials},    {"seed", seed},
                       {"rng", rng_name}};
        j["metrics"] = {{"m_bin", metric(bin)},
                        {"m_gen", metric(gen)},
                        {"m_mu", metric(mu)},
                        {"m_sigma", metric(sigma)}};
        j["mean_mu_band_width"] = mean_mu_width;
        if (!notice.empty()) j["notice"] = notice;
        return j;
    }
};

namespace detail {

struct TrialOutcome {
    bool bin_applicable = false;
    bool bin_violated = false;
    double bin_gap = 0.0;
    bool gen_violated = false;
    double gen_gap = 0.0;
    bool mu_violated = false;
    double mu_gap = 0.0;
    double mu_width = 0.0;
    bool sigma_violated = false;
    double sigma_gap = 0.0;
};

inline TrialOutcome evaluate_trial(const SampleSet& samples, const KnownDistribution& dist,
                                   SignificanceLevel alpha, const Partition& partition) {
    TrialOutcome out;

    if (dist.is_binary() && samples.is_binary()) {
        const double p_true = dist.success_probability();
        const double bound = clopper_pearson_upper(samples.count_ones(), samples.size(), alpha);
        out.bin_applicable = true;
        out.bin_violated = bound < p_true;
        out.bin_gap = bound - p_true;
    }

    double gap_sum = 0.0;
    for (int j = 0; j < kGenGridPoints; ++j) {
        const double x = static_cast<double>(j) / (kGenGridPoints - 1.0);
        const double truth = 1.0 - dist.cdf(x);
        const double bound = general_leakage_bound(samples, alpha, x);
        if (bound < truth) out.gen_violated = true;
        gap_sum += bound - truth;
    }
    out.gen_gap = gap_sum / kGenGridPoints;

    const ExpectationBand band = expectation_bounds(samples, alpha, partition);
    const double mean_true = dist.mean();
    out.mu_violated = mean_true < band.mu_lower || mean_true > band.mu_upper;
    out.mu_gap = band.mu_upper - mean_true;
    out.mu_width = band.mu_upper - band.mu_lower;

    const double sd_bound = std_dev_upper(samples, alpha, partition, band);
    const double sd_true = dist.sd();
    out.sigma_violated = sd_bound < sd_true;
    out.sigma_gap = sd_bound - sd_true;

    return out;
}

}  // namespace detail

// Runs `trials` independent draws of n samples. Trial t derives its stream
// from (seed, t), so reruns and out-of-order execution reproduce bit-identical
// reports; aggregation is in trial-index order.
inline TrialReport run_coverage(const KnownDistribution& dist, std::size_t n,
                                SignificanceLevel alpha, const Partition& partition, long trials,
                                std::uint64_t seed) {
    if (trials < 1) throw std::domain_error("run_coverage requires trials >= 1");
    if (n < 1) throw std::domain_error("run_coverage requires n >= 1");

    TrialReport report;
    report.dist = dist.describe();
    report.n = n;
    report.alpha = alpha.value();
    report.partition_cells = partition.cells();
    report.trials = trials;
    report.seed = seed;

    const bool binary = dist.is_binary();
    report.bin.applicable = binary;
    if (!binary) report.notice = "binomial bound skipped: distribution is not binary";

    std::vector<double> draws(n);
    for (long t = 0; t < trials; ++t) {
        CounterRng rng(seed, static_cast<std::uint64_t>(t));
        for (std::size_t i = 0; i < n; ++i) draws[i] = dist.sample(rng);
        const SampleSet samples(draws);
        const auto outcome = detail::evaluate_trial(samples, dist, alpha, partition);

        if (outcome.bin_applicable) {
            report.bin.violations += outcome.bin_violated;
            report.bin.mean_gap += outcome.bin_gap;
        }
        report.gen.violations += outcome.gen_violated;
        report.gen.mean_gap += outcome.gen_gap;
        report.mu.violations += outcome.mu_violated;
        report.mu.mean_gap += outcome.mu_gap;
        report.mean_mu_width += outcome.mu_width;
        report.sigma.violations += outcome.sigma_violated;
        report.sigma.mean_gap += outcome.sigma_gap;
    }

    const double t = static_cast<double>(trials);
    if (binary) report.bin.mean_gap /= t;
    report.gen.mean_gap /= t;
    report.mu.mean_gap /= t;
    report.sigma.mean_gap /= t;
    report.mean_mu_width /= t;
    return report;
}

// Exact violation rates for finitely supported distributions: every ordered
// outcome in support^n is evaluated and weighted by its probability. Intended
// for tiny n, where it replaces sampling noise entirely.
struct ExactCoverage {
    bool bin_applicable = false;
    double bin_rate = 0.0;
    double gen_rate = 0.0;
    double mu_rate = 0.0;
    double sigma_rate = 0.0;
};

inline ExactCoverage exact_coverage(const KnownDistribution& dist, std::size_t n,
                                    SignificanceLevel alpha, const Partition& partition) {
    const auto fs = dist.finite_support();
    if (!fs) {
        throw std::domain_error("exact_coverage requires a finitely supported distribution");
    }
    if (n < 1) throw std::domain_error("exact_coverage requires n >= 1");
    const auto& [support, weights] = *fs;

    ExactCoverage exact;
    exact.bin_applicable = dist.is_binary();

    std::vector<std::size_t> idx(n, 0);
    std::vector<double> values(n);
    while (true) {
        double prob = 1.0;
        for (std::size_t i = 0; i < n; ++i) prob *= weights[idx[i]];
        if (prob > 0.0) {
            for (std::size_t i = 0; i < n; ++i) values[i] = support[idx[i]];
            const SampleSet samples(values);
            const auto outcome = detail::evaluate_trial(samples, dist, alpha, partition);
            if (outcome.bin_applicable && outcome.bin_violated) exact.bin_rate += prob;
            if (outcome.gen_violated) exact.gen_rate += prob;
            if (outcome.mu_violated) exact.mu_rate += prob;
            if (outcome.sigma_violated) exact.sigma_rate += prob;
        }

        std::size_t pos = 0;
        while (pos < n && ++idx[pos] == support.size()) {
            idx[pos] = 0;
            ++pos;
        }
        if (pos == n) break;
    }
    return exact;
}

// Mean bound gaps over an (n, K) grid. Samples for a given n are shared
// across all K cells, so partition refinement acts on identical data.
struct TightnessCell {
    std::size_t n = 0;
    std::size_t k = 0;
    double gen_gap_mid = 0.0;  // exceedance bound gap at x = 0.5
    double mu_width = 0.0;
    double mu_gap = 0.0;
    double sigma_gap = 0.0;
    bool bin_applicable = false;
    double bin_gap = 0.0;
};

inline std::vector<TightnessCell> tightness_sweep(const KnownDistribution& dist,
                                                  const std::vector<std::size_t>& n_grid,
                                                  const std::vector<std::size_t>& k_grid,
                                                  SignificanceLevel alpha, std::uint64_t seed) {
    if (n_grid.empty() || k_grid.empty()) {
        throw std::domain_error("tightness_sweep requires non-empty grids");
    }
    constexpr int kTrialsPerCell = 8;

    std::vector<TightnessCell> table;
    table.reserve(n_grid.size() * k_grid.size());

    for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
        const std::size_t n = n_grid[ni];
        if (n < 1) throw std::domain_error("tightness_sweep requires n >= 1");

        std::vector<SampleSet> trial_samples;
        trial_samples.reserve(kTrialsPerCell);
        std::vector<double> draws(n);
        for (int t = 0; t < kTrialsPerCell; ++t) {
            CounterRng rng(seed, ni * kTrialsPerCell + static_cast<std::uint64_t>(t));
            for (std::size_t i = 0; i < n; ++i) draws[i] = dist.sample(rng);
            trial_samples.emplace_back(draws);
        }

        for (std::size_t k : k_grid) {
            const Partition partition = Partition::uniform(k);
            TightnessCell cell;
            cell.n = n;
            cell.k = k;
            cell.bin_applicable = dist.is_binary();
            for (const auto& samples : trial_samples) {
                const auto outcome = detail::evaluate_trial(samples, dist, alpha, partition);
                cell.gen_gap_mid +=
                    general_leakage_bound(samples, alpha, 0.5) - (1.0 - dist.cdf(0.5));
                cell.mu_width += outcome.mu_width;
                cell.mu_gap += outcome.mu_gap;
                cell.sigma_gap += outcome.sigma_gap;
                if (outcome.bin_applicable) cell.bin_gap += outcome.bin_gap;
            }
            cell.gen_gap_mid /= kTrialsPerCell;
            cell.mu_width /= kTrialsPerCell;
            cell.mu_gap /= kTrialsPerCell;
            cell.sigma_gap /= kTrialsPerCell;
            cell.bin_gap /= kTrialsPerCell;
            table.push_back(cell);
        }
    }
    return table;
}

}  // namespace probe::sim
