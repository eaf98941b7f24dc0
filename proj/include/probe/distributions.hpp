#pragma once

// Ground-truth score distributions with analytic CDFs and moments, standing
// in for the unobservable output law during coverage simulation.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "probe/rng.hpp"
#include "probe/special.hpp"

namespace probe::sim {

class KnownDistribution {
public:
    static KnownDistribution bernoulli(double p) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("bernoulli p must lie in [0,1]");
        KnownDistribution d;
        d.kind_ = Kind::kDiscrete;
        d.support_ = {0.0, 1.0};
        d.weights_ = {1.0 - p, p};
        d.label_ = "bernoulli(" + format(p) + ")";
        return d;
    }

    static KnownDistribution point_mass(double v) {
        if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("point mass must lie in [0,1]");
        KnownDistribution d;
        d.kind_ = Kind::kDiscrete;
        d.support_ = {v};
        d.weights_ = {1.0};
        d.label_ = "point_mass(" + format(v) + ")";
        return d;
    }

    static KnownDistribution discrete(std::vector<double> support, std::vector<double> weights) {
        if (support.empty() || support.size() != weights.size()) {
            throw std::domain_error("discrete distribution needs matching support and weights");
        }
        // Merge duplicate atoms and keep the support sorted.
        std::map<double, double> atoms;
        double sum = 0.0;
        for (std::size_t i = 0; i < support.size(); ++i) {
            if (!(support[i] >= 0.0 && support[i] <= 1.0)) {
                throw std::domain_error("discrete support must lie in [0,1]");
            }
            if (!(weights[i] >= 0.0)) throw std::domain_error("weights must be >= 0");
            atoms[support[i]] += weights[i];
            sum += weights[i];
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw std::domain_error("discrete weights must sum to 1");
        }
        KnownDistribution d;
        d.kind_ = Kind::kDiscrete;
        std::string sup, wts;
        for (const auto& [v, w] : atoms) {
            d.support_.push_back(v);
            d.weights_.push_back(w / sum);
            sup += (sup.empty() ? "" : ",") + format(v);
            wts += (wts.empty() ? "" : ",") + format(w / sum);
        }
        d.label_ = "discrete(" + sup + "@" + wts + ")";
        return d;
    }

    static KnownDistribution beta(double a, double b) {
        if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("beta shapes must be positive");
        KnownDistribution d;
        d.kind_ = Kind::kBeta;
        d.beta_a_ = a;
        d.beta_b_ = b;
        d.label_ = "beta(" + format(a) + "," + format(b) + ")";
        return d;
    }

    static KnownDistribution mixture(std::vector<KnownDistribution> components,
                                     std::vector<double> weights) {
        if (components.empty() || components.size() != weights.size()) {
            throw std::domain_error("mixture needs matching components and weights");
        }
        double sum = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0)) throw std::domain_error("mixture weights must be >= 0");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw std::domain_error("mixture weights must sum to 1");
        KnownDistribution d;
        d.kind_ = Kind::kMixture;
        std::string parts;
        for (std::size_t i = 0; i < components.size(); ++i) {
            parts += (parts.empty() ? "" : "|") + components[i].label_;
            d.components_.push_back(std::make_shared<KnownDistribution>(std::move(components[i])));
            d.weights_.push_back(weights[i] / sum);
        }
        std::string wts;
        for (double w : d.weights_) wts += (wts.empty() ? "" : ",") + format(w);
        d.label_ = "mixture(" + parts + "@" + wts + ")";
        return d;
    }

    double cdf(double x) const {
        switch (kind_) {
            case Kind::kDiscrete: {
                double acc = 0.0;
                for (std::size_t i = 0; i < support_.size() && support_[i] <= x; ++i) {
                    acc += weights_[i];
                }
                return acc;
            }
            case Kind::kBeta:
                return regularized_incomplete_beta(beta_a_, beta_b_, x);
            case Kind::kMixture: {
                double acc = 0.0;
                for (std::size_t i = 0; i < components_.size(); ++i) {
                    acc += weights_[i] * components_[i]->cdf(x);
                }
                return acc;
            }
        }
        return 0.0;
    }

    double mean() const {
        switch (kind_) {
            case Kind::kDiscrete: {
                double m = 0.0;
                for (std::size_t i = 0; i < support_.size(); ++i) m += weights_[i] * support_[i];
                return m;
            }
            case Kind::kBeta:
                return beta_a_ / (beta_a_ + beta_b_);
            case Kind::kMixture: {
                double m = 0.0;
                for (std::size_t i = 0; i < components_.size(); ++i) {
                    m += weights_[i] * components_[i]->mean();
                }
                return m;
            }
        }
        return 0.0;
    }

    double sd() const { return std::sqrt(std::max(0.0, second_moment() - mean() * mean())); }

    // Inverse-CDF sampling throughout; the beta branch reuses the same
    // quantile numerics the bounds are built on.
    double sample(CounterRng& rng) const {
        const double u = rng.next_double();
        switch (kind_) {
            case Kind::kDiscrete: {
                double acc = 0.0;
                for (std::size_t i = 0; i < support_.size(); ++i) {
                    acc += weights_[i];
                    if (u < acc) return support_[i];
                }
                return support_.back();
            }
            case Kind::kBeta:
                return beta_quantile(u, beta_a_, beta_b_);
            case Kind::kMixture: {
                double acc = 0.0;
                std::size_t pick = components_.size() - 1;
                for (std::size_t i = 0; i < components_.size(); ++i) {
                    acc += weights_[i];
                    if (u < acc) {
                        pick = i;
                        break;
                    }
                }
                return components_[pick]->sample(rng);
            }
        }
        return 0.0;
    }

    // Atom values and probabilities when the distribution is finitely
    // supported; empty for continuous kinds.
    std::optional<std::pair<std::vector<double>, std::vector<double>>> finite_support() const {
        switch (kind_) {
            case Kind::kDiscrete:
                return std::make_pair(support_, weights_);
            case Kind::kBeta:
                return std::nullopt;
            case Kind::kMixture: {
                std::map<double, double> atoms;
                for (std::size_t i = 0; i < components_.size(); ++i) {
                    const auto child = components_[i]->finite_support();
                    if (!child) return std::nullopt;
                    for (std::size_t k = 0; k < child->first.size(); ++k) {
                        atoms[child->first[k]] += weights_[i] * child->second[k];
                    }
                }
                std::vector<double> sup, wts;
                for (const auto& [v, w] : atoms) {
                    sup.push_back(v);
                    wts.push_back(w);
                }
                return std::make_pair(std::move(sup), std::move(wts));
            }
        }
        return std::nullopt;
    }

    // Binary kinds admit the binomial bound.
    bool is_binary() const {
        const auto fs = finite_support();
        if (!fs) return false;
        for (std::size_t i = 0; i < fs->first.size(); ++i) {
            if (fs->second[i] > 0.0 && fs->first[i] != 0.0 && fs->first[i] != 1.0) return false;
        }
        return true;
    }

    // Pr(X = 1); meaningful for binary kinds.
    double success_probability() const {
        const auto fs = finite_support();
        if (!fs) return 0.0;
        double p = 0.0;
        for (std::size_t i = 0; i < fs->first.size(); ++i) {
            if (fs->first[i] == 1.0) p += fs->second[i];
        }
        return p;
    }

    const std::string& describe() const { return label_; }

private:
    enum class Kind { kDiscrete, kBeta, kMixture };

    static std::string format(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%g", v);
        return buf;
    }

    double second_moment() const {
        switch (kind_) {
            case Kind::kDiscrete: {
                double m2 = 0.0;
                for (std::size_t i = 0; i < support_.size(); ++i) {
                    m2 += weights_[i] * support_[i] * support_[i];
                }
                return m2;
            }
            case Kind::kBeta: {
                const double s = beta_a_ + beta_b_;
                const double var = beta_a_ * beta_b_ / (s * s * (s + 1.0));
                const double m = beta_a_ / s;
                return var + m * m;
            }
            case Kind::kMixture: {
                double m2 = 0.0;
                for (std::size_t i = 0; i < components_.size(); ++i) {
                    m2 += weights_[i] * components_[i]->second_moment();
                }
                return m2;
            }
        }
        return 0.0;
    }

    Kind kind_ = Kind::kDiscrete;
    std::vector<double> support_;
    std::vector<double> weights_;
    double beta_a_ = 1.0;
    double beta_b_ = 1.0;
    std::vector<std::shared_ptr<const KnownDistribution>> components_;
    std::string label_;
};

}  // namespace probe::sim
