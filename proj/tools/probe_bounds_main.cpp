// probe-bounds: evaluate Monte Carlo score files with distribution-free
// guarantees, run coverage simulations, and plan sample sizes.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "probe/bounds.hpp"
#include "probe/coverage.hpp"
#include "probe/distributions.hpp"
#include "probe/records.hpp"
#include "probe/report.hpp"

namespace {

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        values.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument("bad number '" + item + "'");
    }
    if (values.empty()) throw std::invalid_argument("empty number list");
    return values;
}

probe::sim::KnownDistribution parse_simple_dist(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) {
        throw std::invalid_argument("distribution spec needs the form kind:args, got '" + spec +
                                    "'");
    }
    const std::string kind = spec.substr(0, colon);
    const std::string args = spec.substr(colon + 1);
    if (kind == "bernoulli") {
        return probe::sim::KnownDistribution::bernoulli(std::stod(args));
    }
    if (kind == "beta") {
        const auto v = parse_number_list(args);
        if (v.size() != 2) throw std::invalid_argument("beta spec needs two shape parameters");
        return probe::sim::KnownDistribution::beta(v[0], v[1]);
    }
    if (kind == "point" || kind == "point_mass") {
        return probe::sim::KnownDistribution::point_mass(std::stod(args));
    }
    if (kind == "discrete") {
        const auto at = args.find('@');
        if (at == std::string::npos) {
            throw std::invalid_argument("discrete spec needs values@weights");
        }
        return probe::sim::KnownDistribution::discrete(parse_number_list(args.substr(0, at)),
                                                       parse_number_list(args.substr(at + 1)));
    }
    throw std::invalid_argument("unknown distribution kind '" + kind + "'");
}

// Specs: bernoulli:P | beta:A,B | point:V | discrete:V1,V2@W1,W2
//        mixture:SPEC|SPEC@W1,W2 (simple components only)
probe::sim::KnownDistribution parse_dist(const std::string& spec) {
    if (spec.rfind("mixture:", 0) == 0) {
        const std::string args = spec.substr(8);
        const auto at = args.rfind('@');
        if (at == std::string::npos) {
            throw std::invalid_argument("mixture spec needs components@weights");
        }
        std::vector<probe::sim::KnownDistribution> components;
        std::stringstream ss(args.substr(0, at));
        std::string part;
        while (std::getline(ss, part, '|')) components.push_back(parse_simple_dist(part));
        return probe::sim::KnownDistribution::mixture(std::move(components),
                                                      parse_number_list(args.substr(at + 1)));
    }
    return parse_simple_dist(spec);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

struct EvaluateOptions {
    std::string input;
    std::string h = "score";
    double alpha = 0.01;
    std::size_t partition_k = 100;
    double rho = 2.0;
    std::uint64_t seed = 0;
    std::string out_dir;
    bool plots = false;
};

int run_evaluate(const EvaluateOptions& opt) {
    std::ifstream in(opt.input);
    if (!in) throw probe::IngestionError("cannot open input file " + opt.input);
    const auto records = probe::report::read_records(in);

    const probe::SignificanceLevel alpha(opt.alpha);
    const probe::Partition partition = probe::Partition::uniform(opt.partition_k);
    const auto report = probe::report::evaluate_records(
        records, probe::report::h_from_name(opt.h), alpha, partition, opt.rho, opt.seed);

    std::filesystem::create_directories(opt.out_dir);
    const auto report_path = std::filesystem::path(opt.out_dir) / "report.json";
    write_text_file(report_path, probe::report::report_to_json(report).dump(2) + "\n");
    if (opt.plots) {
        for (const auto& q : report.queries) {
            probe::report::emit_plot_data(q, opt.out_dir);
        }
    }
    std::cout << report_path.string() << "\n";
    return 0;
}

struct SimulateOptions {
    std::string dist;
    std::size_t n = 1024;
    long trials = 1000;
    double alpha = 0.01;
    std::size_t partition_k = 100;
    std::uint64_t seed = 0;
    std::string out_dir;
};

int run_simulate(const SimulateOptions& opt) {
    const auto dist = parse_dist(opt.dist);
    const probe::SignificanceLevel alpha(opt.alpha);
    const probe::Partition partition = probe::Partition::uniform(opt.partition_k);
    const auto report =
        probe::sim::run_coverage(dist, opt.n, alpha, partition, opt.trials, opt.seed);
    const std::string text = report.to_json().dump(2) + "\n";
    if (opt.out_dir.empty()) {
        std::cout << text;
    } else {
        std::filesystem::create_directories(opt.out_dir);
        const auto path = std::filesystem::path(opt.out_dir) / "coverage.json";
        write_text_file(path, text);
        std::cout << path.string() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distribution-free probabilistic evaluation of Monte Carlo score samples"};
    app.require_subcommand(1);
    // The evaluate subcommand owns --h, so help stays long-form only.
    app.set_help_flag("--help", "print help");

    EvaluateOptions eval_opt;
    auto* evaluate = app.add_subcommand(
        "evaluate", "Score a record file and report every applicable bound");
    evaluate->set_help_flag("--help", "print help");
    evaluate->add_option("--input", eval_opt.input, "JSONL record file")->required();
    evaluate->add_option("--h", eval_opt.h, "score function: score, rouge-l, or keyword")
        ->default_val("score");
    evaluate->add_option("--alpha", eval_opt.alpha, "significance level in (0, 0.5]")
        ->default_val(0.01);
    evaluate->add_option("--partition-k", eval_opt.partition_k, "uniform partition cells")
        ->default_val(100);
    evaluate->add_option("--rho", eval_opt.rho, "ED deviation weight")->default_val(2.0);
    evaluate->add_option("--seed", eval_opt.seed, "seed for subsampling series")->default_val(0);
    evaluate->add_option("--out", eval_opt.out_dir, "output directory")->required();
    evaluate->add_flag("--plots", eval_opt.plots, "emit per-query plot CSVs");

    SimulateOptions sim_opt;
    auto* simulate = app.add_subcommand(
        "simulate", "Measure empirical coverage of every bound on a known distribution");
    simulate
        ->add_option("--dist", sim_opt.dist,
                     "bernoulli:P | beta:A,B | point:V | discrete:V1,..@W1,.. | "
                     "mixture:SPEC|SPEC@W1,W2")
        ->required();
    simulate->add_option("--n", sim_opt.n, "samples per trial")->default_val(1024);
    simulate->add_option("--trials", sim_opt.trials, "number of trials")->default_val(1000);
    simulate->add_option("--alpha", sim_opt.alpha, "significance level in (0, 0.5]")
        ->default_val(0.01);
    simulate->add_option("--partition-k", sim_opt.partition_k, "uniform partition cells")
        ->default_val(100);
    simulate->add_option("--seed", sim_opt.seed, "base seed; trial t uses stream (seed, t)")
        ->default_val(0);
    simulate->add_option("--out", sim_opt.out_dir, "output directory (default: stdout)");

    double ss_epsilon = 0.0;
    double ss_alpha = 0.01;
    int ss_sided = 2;
    auto* sample_size = app.add_subcommand(
        "sample-size", "Smallest n whose confidence-band half-width is at most epsilon");
    sample_size->add_option("--epsilon", ss_epsilon, "target half-width")->required();
    sample_size->add_option("--alpha", ss_alpha, "significance level in (0, 0.5]")
        ->default_val(0.01);
    sample_size->add_option("--sided", ss_sided, "1 (one-sided) or 2 (two-sided)")
        ->default_val(2)
        ->check(CLI::IsMember({1, 2}));

    try {
        app.parse(argc, argv);
        if (evaluate->parsed()) return run_evaluate(eval_opt);
        if (simulate->parsed()) return run_simulate(sim_opt);
        const auto sided = ss_sided == 1 ? probe::Sidedness::kOneSided : probe::Sidedness::kTwoSided;
        std::cout << probe::sample_size_for(ss_epsilon, probe::SignificanceLevel(ss_alpha), sided)
                  << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const probe::IngestionError& e) {
        std::cerr << "ingestion error: " << e.what() << "\n";
        return 3;
    } catch (const probe::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
