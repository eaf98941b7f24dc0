#pragma once

// Evaluation measures mapping generated text to scores: ROUGE-L-style LCS F1,
// binary keyword leakage, self-BLEU generation diversity, and the
// expectation-deviation development score.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "probe/samples.hpp"

namespace probe::scores {

// Tokenizer identity recorded in reports: Unicode-whitespace splitting,
// ASCII lowercasing, trailing ASCII punctuation stripped per token.
inline constexpr const char* kTokenizerName = "whitespace-lower-strip/1";

namespace detail {

inline bool is_unicode_space(char32_t cp) {
    switch (cp) {
        case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
        case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
        case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

// Decodes one UTF-8 code point at i; malformed bytes are passed through as
// single code units so tokenization never fails.
inline char32_t decode_utf8(const std::string& s, std::size_t& i) {
    const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    const unsigned char b0 = byte(i);
    std::size_t len = 1;
    char32_t cp = b0;
    if ((b0 & 0xE0) == 0xC0) { len = 2; cp = b0 & 0x1F; }
    else if ((b0 & 0xF0) == 0xE0) { len = 3; cp = b0 & 0x0F; }
    else if ((b0 & 0xF8) == 0xF0) { len = 4; cp = b0 & 0x07; }
    if (i + len > s.size()) len = 1, cp = b0;
    for (std::size_t k = 1; k < len; ++k) {
        const unsigned char c = byte(i + k);
        if ((c & 0xC0) != 0x80) { len = 1; cp = b0; break; }
        cp = (cp << 6) | (c & 0x3F);
    }
    i += len;
    return cp;
}

inline bool is_ascii_punct(char c) {
    return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

}  // namespace detail

// A tokenized generation; tokens derive deterministically from source_text.
struct TokenSequence {
    std::vector<std::string> tokens;
    std::string source_text;

    static TokenSequence from_text(const std::string& text) {
        TokenSequence seq;
        seq.source_text = text;
        std::string current;
        std::size_t i = 0;
        const auto flush = [&] {
            while (!current.empty() && detail::is_ascii_punct(current.back())) {
                current.pop_back();
            }
            if (!current.empty()) seq.tokens.push_back(current);
            current.clear();
        };
        while (i < text.size()) {
            const std::size_t start = i;
            const char32_t cp = detail::decode_utf8(text, i);
            if (detail::is_unicode_space(cp)) {
                flush();
            } else if (cp < 0x80) {
                current.push_back(static_cast<char>(
                    std::tolower(static_cast<unsigned char>(text[start]))));
            } else {
                current.append(text, start, i - start);
            }
        }
        flush();
        return seq;
    }
};

namespace detail {

inline std::size_t lcs_length(const std::vector<std::string>& a,
                              const std::vector<std::string>& b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

}  // namespace detail

// LCS-based F1: with L = |LCS|, P = L/|candidate|, R = L/|reference|,
// F1 = 2PR/(P+R). Zero when either side is empty or nothing matches.
inline double rouge_l(const TokenSequence& candidate, const TokenSequence& reference) {
    if (candidate.tokens.empty() || reference.tokens.empty()) return 0.0;
    const double l = static_cast<double>(detail::lcs_length(candidate.tokens, reference.tokens));
    if (l == 0.0) return 0.0;
    const double p = l / static_cast<double>(candidate.tokens.size());
    const double r = l / static_cast<double>(reference.tokens.size());
    return 2.0 * p * r / (p + r);
}

namespace detail {

// Lowercased, whitespace runs collapsed to a single space, trimmed.
inline std::string normalize_for_match(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    bool pending_space = false;
    while (i < text.size()) {
        const std::size_t start = i;
        const char32_t cp = decode_utf8(text, i);
        if (is_unicode_space(cp)) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            if (cp < 0x80) {
                out.push_back(static_cast<char>(
                    std::tolower(static_cast<unsigned char>(text[start]))));
            } else {
                out.append(text, start, i - start);
            }
        }
    }
    return out;
}

}  // namespace detail

// 1 iff any keyword occurs as a case-insensitive substring of the answer
// after whitespace normalization.
inline int keyword_leak(const std::string& answer, const std::vector<std::string>& keywords) {
    if (keywords.empty()) throw std::domain_error("keyword_leak requires at least one keyword");
    const std::string haystack = detail::normalize_for_match(answer);
    for (const auto& kw : keywords) {
        if (haystack.find(detail::normalize_for_match(kw)) != std::string::npos) return 1;
    }
    return 0;
}

namespace detail {

inline std::unordered_map<std::string, int> ngram_counts(const std::vector<std::string>& toks,
                                                         std::size_t order) {
    std::unordered_map<std::string, int> counts;
    if (toks.size() < order) return counts;
    for (std::size_t i = 0; i + order <= toks.size(); ++i) {
        std::string key;
        for (std::size_t k = 0; k < order; ++k) {
            key += toks[i + k];
            key.push_back('\x1f');
        }
        ++counts[key];
    }
    return counts;
}

// BLEU of one candidate against a reference set: modified n-gram precisions
// up to order min(4, |candidate|), geometric mean, brevity penalty, and
// eps = 1e-9 substituted for zero match counts.
inline double bleu(const std::vector<std::string>& candidate,
                   const std::vector<std::vector<std::string>>& references) {
    constexpr double kEps = 1e-9;
    const std::size_t max_order = std::min<std::size_t>(4, candidate.size());
    if (max_order == 0) return 0.0;

    double log_sum = 0.0;
    for (std::size_t order = 1; order <= max_order; ++order) {
        const auto cand_counts = ngram_counts(candidate, order);
        std::unordered_map<std::string, int> clip;
        for (const auto& ref : references) {
            for (const auto& [gram, c] : ngram_counts(ref, order)) {
                auto& best = clip[gram];
                best = std::max(best, c);
            }
        }
        double matches = 0.0;
        double total = 0.0;
        for (const auto& [gram, c] : cand_counts) {
            const auto it = clip.find(gram);
            matches += std::min(c, it == clip.end() ? 0 : it->second);
            total += c;
        }
        const double precision = (matches > 0.0 ? matches : kEps) / std::max(total, 1.0);
        log_sum += std::log(precision);
    }

    // Effective reference length: closest to the candidate, ties broken short.
    const std::size_t c = candidate.size();
    std::size_t r = references.front().size();
    for (const auto& ref : references) {
        const auto diff = [&](std::size_t len) {
            return len > c ? len - c : c - len;
        };
        if (diff(ref.size()) < diff(r) || (diff(ref.size()) == diff(r) && ref.size() < r)) {
            r = ref.size();
        }
    }
    const double bp = c > r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
    return bp * std::exp(log_sum / static_cast<double>(max_order));
}

}  // namespace detail

// 1 - mean self-BLEU: each generation scored against the remaining ones as
// references, clamped to [0,1]. Needs at least two generations.
inline double self_bleu_diversity(const std::vector<TokenSequence>& generations) {
    if (generations.size() < 2) {
        throw std::domain_error("self_bleu_diversity requires at least two generations");
    }
    double total = 0.0;
    std::vector<std::vector<std::string>> refs;
    refs.reserve(generations.size() - 1);
    for (std::size_t i = 0; i < generations.size(); ++i) {
        refs.clear();
        for (std::size_t j = 0; j < generations.size(); ++j) {
            if (j != i) refs.push_back(generations[j].tokens);
        }
        total += detail::bleu(generations[i].tokens, refs);
    }
    const double diversity = 1.0 - total / static_cast<double>(generations.size());
    return std::clamp(diversity, 0.0, 1.0);
}

// Trade-off weight between sample mean and deviation.
struct EdConfig {
    double rho = 2.0;

    explicit EdConfig(double rho_value = 2.0) : rho(rho_value) {
        if (!(rho >= 0.0)) throw std::domain_error("ed rho must be non-negative");
    }
};

// Expectation-deviation score: mean + rho * population sd. Guarantee-free;
// may exceed 1.
inline double ed_score(const SampleSet& samples, const EdConfig& config = EdConfig()) {
    return samples.mean() + config.rho * samples.population_sd();
}

}  // namespace probe::scores
