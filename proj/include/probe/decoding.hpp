#pragma once

// Decoding-side math over externally supplied token probabilities: entropy
// and its analytic gradient, the composite entropy objective, sequence
// confidence, adaptive temperature, and temperature/top-p sampling.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "probe/errors.hpp"
#include "probe/rng.hpp"

namespace probe::decoding {

// One next-token distribution over a vocabulary of size |V|.
struct TokenDistribution {
    std::vector<double> probs;

    static TokenDistribution from_probs(std::vector<double> probs) {
        if (probs.empty()) throw std::domain_error("token distribution must be non-empty");
        double sum = 0.0;
        for (double p : probs) {
            if (!(p >= 0.0)) throw std::domain_error("token probabilities must be >= 0");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw std::domain_error("token probabilities must sum to 1, got " +
                                    std::to_string(sum));
        }
        return TokenDistribution{std::move(probs)};
    }

    static TokenDistribution from_logits(const std::vector<double>& logits) {
        if (logits.empty()) throw std::domain_error("logit vector must be non-empty");
        for (double z : logits) {
            if (!std::isfinite(z)) throw std::domain_error("logits must be finite");
        }
        const double zmax = *std::max_element(logits.begin(), logits.end());
        std::vector<double> probs(logits.size());
        double sum = 0.0;
        for (std::size_t i = 0; i < logits.size(); ++i) {
            probs[i] = std::exp(logits[i] - zmax);
            sum += probs[i];
        }
        for (double& p : probs) p /= sum;
        return TokenDistribution{std::move(probs)};
    }

    std::size_t vocab_size() const { return probs.size(); }
};

// Per-step factorization of a length-m output sequence; uniform vocabulary.
struct SequenceDistribution {
    std::vector<TokenDistribution> steps;

    explicit SequenceDistribution(std::vector<TokenDistribution> s) : steps(std::move(s)) {
        if (steps.empty()) throw std::domain_error("sequence must have at least one step");
        for (const auto& step : steps) {
            if (step.vocab_size() != steps.front().vocab_size()) {
                throw std::domain_error("sequence steps must share one vocabulary size");
            }
        }
    }

    std::size_t length() const { return steps.size(); }
    std::size_t vocab_size() const { return steps.front().vocab_size(); }
};

// H(q) = -sum q_i ln q_i in nats; zero-probability terms contribute 0.
inline double token_entropy(const TokenDistribution& dist) {
    double h = 0.0;
    for (double p : dist.probs) {
        if (p > 0.0) h -= p * std::log(p);
    }
    return std::max(0.0, h);
}

// Mean per-step entropy of the sequence.
inline double sequence_entropy_loss(const SequenceDistribution& seq) {
    double total = 0.0;
    for (const auto& step : seq.steps) total += token_entropy(step);
    return total / static_cast<double>(seq.length());
}

// Analytic gradient of H(softmax(z)) w.r.t. the logits z:
//   d H / d z_j = -q_j (ln q_j + H).
inline std::vector<double> entropy_gradient(const std::vector<double>& logits) {
    const TokenDistribution q = TokenDistribution::from_logits(logits);
    const double h = token_entropy(q);
    std::vector<double> grad(logits.size());
    for (std::size_t j = 0; j < logits.size(); ++j) {
        const double qj = q.probs[j];
        grad[j] = qj > 0.0 ? -qj * (std::log(qj) + h) : 0.0;
    }
    return grad;
}

// Entropy weights: positive on forget batches, negative on retain batches.
struct EntropyObjectiveConfig {
    double lambda_forget;
    double lambda_retain;

    EntropyObjectiveConfig(double forget_weight, double retain_weight)
        : lambda_forget(forget_weight), lambda_retain(retain_weight) {
        if (!(lambda_forget > 0.0)) {
            throw std::domain_error("forget entropy weight must be positive");
        }
        if (!(lambda_retain < 0.0)) {
            throw std::domain_error("retain entropy weight must be negative");
        }
    }
};

// Composite objective value: unlearn_loss + lf * mean(forget) + lr *
// mean(retain). Empty batches contribute 0. The base unlearning loss enters
// as an opaque scalar.
inline double entropy_objective(double unlearn_loss_value,
                                const std::vector<double>& forget_losses,
                                const std::vector<double>& retain_losses,
                                const EntropyObjectiveConfig& config) {
    const auto mean = [](const std::vector<double>& v) {
        if (v.empty()) return 0.0;
        return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    return unlearn_loss_value + config.lambda_forget * mean(forget_losses) +
           config.lambda_retain * mean(retain_losses);
}

// Mean over steps of the most-likely-token probability. Computed over
// whatever sequence is supplied: either an incrementally recorded prefix
// during generation or the completed sequence post hoc.
inline double sequence_confidence(const SequenceDistribution& seq) {
    double total = 0.0;
    for (const auto& step : seq.steps) {
        total += *std::max_element(step.probs.begin(), step.probs.end());
    }
    return total / static_cast<double>(seq.length());
}

struct DecodingPolicy {
    double base_temperature = 1.0;
    double confidence_threshold = 0.9;
    double top_p = 0.9;

    DecodingPolicy(double base = 1.0, double threshold = 0.9, double p = 0.9)
        : base_temperature(base), confidence_threshold(threshold), top_p(p) {
        if (!(base_temperature >= 0.0)) throw std::domain_error("temperature must be >= 0");
        if (!(confidence_threshold >= 0.0 && confidence_threshold <= 1.0)) {
            throw std::domain_error("confidence threshold must lie in [0,1]");
        }
        if (!(top_p > 0.0 && top_p <= 1.0)) throw std::domain_error("top_p must lie in (0,1]");
    }
};

// Temperature drops to 0 (greedy) strictly above the confidence threshold;
// confidence == threshold keeps the base temperature.
inline double effective_temperature(double confidence, const DecodingPolicy& policy) {
    return confidence > policy.confidence_threshold ? 0.0 : policy.base_temperature;
}

// Nucleus filter: stable sort by descending probability (ties keep lower
// token index first), keep the smallest prefix with cumulative mass >= top_p
// including the crossing token, renormalize. Relative probabilities within
// the kept set are preserved exactly.
struct TopPFilter {
    std::vector<std::size_t> kept_indices;  // in descending-probability order
    std::vector<double> kept_probs;         // renormalized
};

inline TopPFilter top_p_filter(const std::vector<double>& probs, double top_p) {
    if (!(top_p > 0.0 && top_p <= 1.0)) throw std::domain_error("top_p must lie in (0,1]");
    std::vector<std::size_t> order(probs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });

    TopPFilter filter;
    double mass = 0.0;
    for (std::size_t idx : order) {
        filter.kept_indices.push_back(idx);
        mass += probs[idx];
        if (mass >= top_p) break;
    }
    filter.kept_probs.reserve(filter.kept_indices.size());
    for (std::size_t idx : filter.kept_indices) {
        filter.kept_probs.push_back(probs[idx] / mass);
    }
    return filter;
}

// Draws one token index. Temperature 0 is greedy argmax (lowest index wins
// ties); otherwise logits are rescaled by 1/temperature, softmaxed, top-p
// filtered, and sampled multinomially from the caller-owned rng state.
inline std::size_t sample_token(const TokenDistribution& dist, double temperature, double top_p,
                                CounterRng& rng) {
    if (!(temperature >= 0.0)) throw std::domain_error("temperature must be >= 0");
    const auto& probs = dist.probs;

    if (temperature == 0.0) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < probs.size(); ++i) {
            if (probs[i] > probs[best]) best = i;
        }
        return best;
    }

    // Rescaled softmax: p_i^(1/tau) / sum, computed through log space.
    std::vector<double> scaled(probs.size());
    double zmax = -HUGE_VAL;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        scaled[i] = probs[i] > 0.0 ? std::log(probs[i]) / temperature : -HUGE_VAL;
        zmax = std::max(zmax, scaled[i]);
    }
    double sum = 0.0;
    for (double& z : scaled) {
        z = z == -HUGE_VAL ? 0.0 : std::exp(z - zmax);
        sum += z;
    }
    for (double& z : scaled) z /= sum;

    const TopPFilter filter = top_p_filter(scaled, top_p);
    const double u = rng.next_double();
    double acc = 0.0;
    for (std::size_t k = 0; k < filter.kept_indices.size(); ++k) {
        acc += filter.kept_probs[k];
        if (u < acc) return filter.kept_indices[k];
    }
    return filter.kept_indices.back();
}

// --- textual exchange format for sequence distributions ---------------------
//
//   probe-seqdist/1
//   vocab <|V|>
//   steps <m>
//   <|V| decimal probabilities per line, one line per step>

inline constexpr const char* kSeqDistMagic = "probe-seqdist/1";

inline void write_sequence_distribution(std::ostream& out, const SequenceDistribution& seq) {
    out << kSeqDistMagic << "\n";
    out << "vocab " << seq.vocab_size() << "\n";
    out << "steps " << seq.length() << "\n";
    char buf[40];
    for (const auto& step : seq.steps) {
        for (std::size_t i = 0; i < step.probs.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", step.probs[i]);
            if (i > 0) out << ' ';
            out << buf;
        }
        out << "\n";
    }
}

inline SequenceDistribution read_sequence_distribution(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    const auto next_line = [&]() {
        if (!std::getline(in, line)) {
            throw IngestionError("unexpected end of sequence-distribution input", lineno);
        }
        ++lineno;
    };

    next_line();
    if (line != kSeqDistMagic) {
        throw IngestionError("expected header '" + std::string(kSeqDistMagic) + "'", lineno);
    }

    const auto read_field = [&](const std::string& name) -> std::size_t {
        next_line();
        std::istringstream ss(line);
        std::string key;
        long long value = -1;
        if (!(ss >> key >> value) || key != name || value < 1) {
            throw IngestionError("expected '" + name + " <positive integer>'", lineno);
        }
        return static_cast<std::size_t>(value);
    };
    const std::size_t vocab = read_field("vocab");
    const std::size_t steps = read_field("steps");

    std::vector<TokenDistribution> parsed;
    parsed.reserve(steps);
    for (std::size_t s = 0; s < steps; ++s) {
        next_line();
        std::istringstream ss(line);
        std::vector<double> probs(vocab);
        for (std::size_t i = 0; i < vocab; ++i) {
            if (!(ss >> probs[i])) {
                throw IngestionError("expected " + std::to_string(vocab) + " probabilities",
                                     lineno);
            }
        }
        double extra;
        if (ss >> extra) {
            throw IngestionError("too many probabilities on step row", lineno);
        }
        try {
            parsed.push_back(TokenDistribution::from_probs(std::move(probs)));
        } catch (const std::domain_error& e) {
            throw IngestionError(e.what(), lineno);
        }
    }
    return SequenceDistribution(std::move(parsed));
}

}  // namespace probe::decoding
