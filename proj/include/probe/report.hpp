#pragma once

// End-to-end evaluation pipeline: apply a score function to each record of a
// query, compute every applicable probabilistic metric, and emit a versioned
// machine-readable report plus plot-ready columnar data.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "probe/bounds.hpp"
#include "probe/ecdf.hpp"
#include "probe/errors.hpp"
#include "probe/records.hpp"
#include "probe/rng.hpp"
#include "probe/samples.hpp"
#include "probe/scores.hpp"

namespace probe::report {

inline constexpr const char* kReportSchema = "probe-bounds/1";
inline constexpr int kGenGridPoints = 21;
inline constexpr int kHistogramBins = 50;
inline constexpr double kDefaultAggregateThreshold = 0.1;

enum class HFunction { kScore, kRougeL, kKeyword };

inline const char* h_name(HFunction h) {
    switch (h) {
        case HFunction::kScore: return "score";
        case HFunction::kRougeL: return "rouge-l";
        case HFunction::kKeyword: return "keyword";
    }
    return "?";
}

inline HFunction h_from_name(const std::string& name) {
    if (name == "score") return HFunction::kScore;
    if (name == "rouge-l") return HFunction::kRougeL;
    if (name == "keyword") return HFunction::kKeyword;
    throw std::invalid_argument("unknown score function '" + name +
                                "' (expected score, rouge-l, or keyword)");
}

// Everything computed for one query, plus the provenance needed to interpret
// each bound. Raw scores are retained for plot emission.
struct QueryReport {
    std::string query_id;
    std::size_t n = 0;
    double alpha = 0.0;
    std::size_t partition_cells = 0;
    std::uint64_t seed = 0;
    std::string h;
    double rho = 2.0;

    double s_mean = 0.0;
    double s_sd = 0.0;
    double ed = 0.0;

    bool binary = false;  // all scores exactly 0 or 1; gates m_bin
    std::size_t successes = 0;
    double m_bin = 0.0;

    double eps_one = 0.0;
    double eps_two = 0.0;
    std::vector<double> gen_grid_x;
    std::vector<double> gen_grid_bound;

    double mu_lower = 0.0;
    double mu_upper = 1.0;
    double sigma_upper = 0.0;

    std::vector<double> scores;
};

namespace detail {

inline double apply_h(const EvaluationRecord& rec, HFunction h) {
    switch (h) {
        case HFunction::kScore:
            if (rec.kind != PayloadKind::kScore) {
                throw IngestionError("record lacks the 'score' payload required by h=score",
                                     rec.source_line);
            }
            return rec.score;
        case HFunction::kRougeL:
            if (rec.kind != PayloadKind::kGenerationReference) {
                throw IngestionError(
                    "record lacks the 'generation'+'reference' payload required by h=rouge-l",
                    rec.source_line);
            }
            return scores::rouge_l(scores::TokenSequence::from_text(rec.generation),
                                   scores::TokenSequence::from_text(rec.reference));
        case HFunction::kKeyword:
            if (rec.kind != PayloadKind::kGenerationKeywords) {
                throw IngestionError(
                    "record lacks the 'generation'+'keywords' payload required by h=keyword",
                    rec.source_line);
            }
            return static_cast<double>(scores::keyword_leak(rec.generation, rec.keywords));
    }
    throw std::logic_error("unreachable");
}

}  // namespace detail

// Computes every applicable metric for the records of a single query. The
// records must share one payload form; the binomial bound is emitted only
// when every score is exactly 0 or 1.
inline QueryReport evaluate_query(const std::vector<EvaluationRecord>& records, HFunction h,
                                  SignificanceLevel alpha, const Partition& partition, double rho,
                                  std::uint64_t seed) {
    if (records.empty()) throw std::domain_error("evaluate_query requires at least one record");
    for (const auto& rec : records) {
        if (rec.kind != records.front().kind) {
            throw IngestionError("query '" + rec.query_id + "' mixes payload form " +
                                     payload_name(rec.kind) + " with " +
                                     payload_name(records.front().kind),
                                 rec.source_line);
        }
    }

    QueryReport q;
    q.query_id = records.front().query_id;
    q.alpha = alpha.value();
    q.partition_cells = partition.cells();
    q.seed = seed;
    q.h = h_name(h);
    q.rho = rho;

    q.scores.reserve(records.size());
    for (const auto& rec : records) q.scores.push_back(detail::apply_h(rec, h));

    const SampleSet samples(q.scores);
    q.n = samples.size();
    q.s_mean = samples.mean();
    q.s_sd = samples.population_sd();
    q.ed = scores::ed_score(samples, scores::EdConfig(rho));

    q.binary = samples.is_binary();
    if (q.binary) {
        q.successes = samples.count_ones();
        q.m_bin = clopper_pearson_upper(q.successes, q.n, alpha);
    }

    q.eps_one = dkw_epsilon(q.n, alpha, Sidedness::kOneSided);
    q.eps_two = dkw_epsilon(q.n, alpha, Sidedness::kTwoSided);
    q.gen_grid_x.reserve(kGenGridPoints);
    q.gen_grid_bound.reserve(kGenGridPoints);
    for (int j = 0; j < kGenGridPoints; ++j) {
        const double x = static_cast<double>(j) / (kGenGridPoints - 1.0);
        q.gen_grid_x.push_back(x);
        q.gen_grid_bound.push_back(general_leakage_bound(samples, alpha, x));
    }

    const ExpectationBand band = expectation_bounds(samples, alpha, partition);
    q.mu_lower = band.mu_lower;
    q.mu_upper = band.mu_upper;
    q.sigma_upper = std_dev_upper(samples, alpha, partition, band);
    return q;
}

struct MetricReport {
    double alpha = 0.0;
    std::size_t partition_cells = 0;
    double rho = 2.0;
    std::uint64_t seed = 0;
    std::string h;
    std::vector<QueryReport> queries;  // sorted by query_id
};

// Groups records by query_id (report order is lexicographic by id) and
// evaluates each group.
inline MetricReport evaluate_records(const std::vector<EvaluationRecord>& records, HFunction h,
                                     SignificanceLevel alpha, const Partition& partition,
                                     double rho, std::uint64_t seed) {
    std::map<std::string, std::vector<EvaluationRecord>> grouped;
    for (const auto& rec : records) grouped[rec.query_id].push_back(rec);

    MetricReport report;
    report.alpha = alpha.value();
    report.partition_cells = partition.cells();
    report.rho = rho;
    report.seed = seed;
    report.h = h_name(h);
    for (const auto& [id, group] : grouped) {
        report.queries.push_back(evaluate_query(group, h, alpha, partition, rho, seed));
    }
    return report;
}

// Fraction of queries whose selected bound strictly exceeds the threshold.
// Queries lacking the field (m_bin on non-binary scores) are excluded.
inline double aggregate_threshold_fraction(const MetricReport& report, const std::string& field,
                                           double threshold) {
    if (report.queries.empty()) {
        throw std::domain_error("aggregate_threshold_fraction requires at least one query");
    }
    std::size_t eligible = 0;
    std::size_t above = 0;
    for (const auto& q : report.queries) {
        std::optional<double> value;
        if (field == "mu_upper") value = q.mu_upper;
        else if (field == "mu_lower") value = q.mu_lower;
        else if (field == "sigma_upper") value = q.sigma_upper;
        else if (field == "ed") value = q.ed;
        else if (field == "mean") value = q.s_mean;
        else if (field == "sd") value = q.s_sd;
        else if (field == "m_bin") value = q.binary ? std::optional<double>(q.m_bin) : std::nullopt;
        else throw std::invalid_argument("unknown aggregate field '" + field + "'");
        if (value) {
            ++eligible;
            above += *value > threshold;
        }
    }
    if (eligible == 0) {
        throw std::domain_error("no query carries aggregate field '" + field + "'");
    }
    return static_cast<double>(above) / static_cast<double>(eligible);
}

inline nlohmann::json query_to_json(const QueryReport& q) {
    nlohmann::json j;
    j["query_id"] = q.query_id;
    j["n"] = q.n;
    j["summary"] = {{"mean", q.s_mean}, {"sd", q.s_sd}, {"ed", q.ed}, {"rho", q.rho}};

    if (q.binary) {
        j["m_bin"] = {{"value", q.m_bin},
                      {"alpha", q.alpha},
                      {"n", q.n},
                      {"sidedness", "one-sided"},
                      {"successes", q.successes}};
    } else {
        j["m_bin"] = nullptr;
    }

    nlohmann::json grid = nlohmann::json::array();
    for (std::size_t i = 0; i < q.gen_grid_x.size(); ++i) {
        grid.push_back({{"x", q.gen_grid_x[i]}, {"bound", q.gen_grid_bound[i]}});
    }
    j["m_gen"] = {{"grid", grid},
                  {"alpha", q.alpha},
                  {"n", q.n},
                  {"epsilon", q.eps_one},
                  {"sidedness", "one-sided"}};
    j["expectation"] = {{"mu_lower", q.mu_lower},
                        {"mu_upper", q.mu_upper},
                        {"alpha", q.alpha},
                        {"n", q.n},
                        {"epsilon", q.eps_two},
                        {"sidedness", "two-sided"},
                        {"partition_k", q.partition_cells}};
    j["sigma"] = {{"value", q.sigma_upper},
                  {"alpha", q.alpha},
                  {"n", q.n},
                  {"epsilon", q.eps_two},
                  {"sidedness", "two-sided"},
                  {"partition_k", q.partition_cells}};
    return j;
}

inline nlohmann::json report_to_json(const MetricReport& report) {
    nlohmann::json j;
    j["schema"] = kReportSchema;
    j["kind"] = "evaluation";
    j["config"] = {{"alpha", report.alpha},
                   {"h", report.h},
                   {"partition_k", report.partition_cells},
                   {"rho", report.rho},
                   {"seed", report.seed},
                   {"tokenizer", scores::kTokenizerName},
                   {"rng", CounterRng::kName}};
    j["aggregate"] = {
        {"field", "mu_upper"},
        {"threshold", kDefaultAggregateThreshold},
        {"fraction",
         aggregate_threshold_fraction(report, "mu_upper", kDefaultAggregateThreshold)},
        {"query_count", report.queries.size()}};
    nlohmann::json queries = nlohmann::json::array();
    for (const auto& q : report.queries) queries.push_back(query_to_json(q));
    j["queries"] = queries;
    return j;
}

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string sanitize_id(const std::string& id) {
    std::string out = id;
    for (char& c : out) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
        if (!ok) c = '_';
    }
    return out;
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace detail

// Writes plot-ready CSVs for one query into `dir`:
//   <id>_hist.csv         50 uniform bins over [0,1] (last bin closed at 1)
//   <id>_cdf.csv          empirical CDF with two-sided band envelopes
//   <id>_convergence.csv  bounds recomputed on seeded prefix subsamples of
//                         sizes 16, 32, ..., n
inline void emit_plot_data(const QueryReport& q, const std::filesystem::path& dir) {
    const std::string stem = detail::sanitize_id(q.query_id);
    const SampleSet samples(q.scores);
    const SignificanceLevel alpha(q.alpha);

    {
        auto out = detail::open_for_write(dir / (stem + "_hist.csv"));
        std::vector<long> counts(kHistogramBins, 0);
        for (double v : q.scores) {
            const int bin = std::min(kHistogramBins - 1,
                                     static_cast<int>(v * static_cast<double>(kHistogramBins)));
            ++counts[bin];
        }
        out << "bin_lo,bin_hi,count\n";
        for (int b = 0; b < kHistogramBins; ++b) {
            out << detail::format_double(static_cast<double>(b) / kHistogramBins) << ","
                << detail::format_double(static_cast<double>(b + 1) / kHistogramBins) << ","
                << counts[b] << "\n";
        }
    }

    {
        auto out = detail::open_for_write(dir / (stem + "_cdf.csv"));
        const CdfBand band = CdfBand::from_samples(samples, alpha, Sidedness::kTwoSided);
        std::vector<double> xs;
        xs.push_back(0.0);
        for (double v : samples.sorted()) {
            if (v != xs.back()) xs.push_back(v);
        }
        if (xs.back() != 1.0) xs.push_back(1.0);
        out << "x,ecdf,lower,upper\n";
        for (double x : xs) {
            out << detail::format_double(x) << "," << detail::format_double(band.base(x)) << ","
                << detail::format_double(band.lower(x)) << ","
                << detail::format_double(band.upper(x)) << "\n";
        }
    }

    {
        auto out = detail::open_for_write(dir / (stem + "_convergence.csv"));
        // Seeded shuffle, then growing prefixes.
        std::vector<double> shuffled = q.scores;
        CounterRng rng(q.seed, detail::fnv1a(q.query_id));
        for (std::size_t i = shuffled.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
            std::swap(shuffled[i - 1], shuffled[j]);
        }
        std::vector<std::size_t> sizes;
        for (std::size_t s = 16; s < shuffled.size(); s *= 2) sizes.push_back(s);
        if (sizes.empty() || sizes.back() != shuffled.size()) sizes.push_back(shuffled.size());

        const Partition partition = Partition::uniform(q.partition_cells);
        out << "size,mean,sd,ed,eps_one,eps_two,mu_lower,mu_upper,sigma_upper\n";
        for (std::size_t s : sizes) {
            const SampleSet prefix(std::vector<double>(shuffled.begin(), shuffled.begin() + s));
            const ExpectationBand band = expectation_bounds(prefix, alpha, partition);
            out << s << "," << detail::format_double(prefix.mean()) << ","
                << detail::format_double(prefix.population_sd()) << ","
                << detail::format_double(scores::ed_score(prefix, scores::EdConfig(q.rho))) << ","
                << detail::format_double(dkw_epsilon(s, alpha, Sidedness::kOneSided)) << ","
                << detail::format_double(dkw_epsilon(s, alpha, Sidedness::kTwoSided)) << ","
                << detail::format_double(band.mu_lower) << ","
                << detail::format_double(band.mu_upper) << ","
                << detail::format_double(std_dev_upper(prefix, alpha, partition, band)) << "\n";
        }
    }
}

}  // namespace probe::report
