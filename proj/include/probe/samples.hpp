#pragma once

// Core value types shared by every bound: a set of unit-interval scores, a
// significance level, and a partition of [0,1].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace probe {

// n Monte Carlo scores, each in [0,1]. Immutable after construction; keeps
// both insertion order and an ascending sorted view.
class SampleSet {
public:
    explicit SampleSet(std::vector<double> values) : values_(std::move(values)) {
        if (values_.empty()) {
            throw std::domain_error("SampleSet requires at least one score");
        }
        for (std::size_t i = 0; i < values_.size(); ++i) {
            const double v = values_[i];
            if (!(v >= 0.0 && v <= 1.0)) {
                throw std::domain_error("score out of [0,1] at index " + std::to_string(i) +
                                        ": " + std::to_string(v));
            }
        }
        sorted_ = values_;
        std::stable_sort(sorted_.begin(), sorted_.end());
    }

    std::size_t size() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& sorted() const { return sorted_; }

    double mean() const {
        double s = 0.0;
        for (double v : values_) s += v;
        return s / static_cast<double>(values_.size());
    }

    // Population standard deviation (divisor n).
    double population_sd() const {
        const double m = mean();
        double s = 0.0;
        for (double v : values_) s += (v - m) * (v - m);
        return std::sqrt(s / static_cast<double>(values_.size()));
    }

    // True when every score is exactly 0 or 1 (gates the binomial bound).
    bool is_binary() const {
        for (double v : values_) {
            if (v != 0.0 && v != 1.0) return false;
        }
        return true;
    }

    std::size_t count_ones() const {
        std::size_t c = 0;
        for (double v : values_) c += (v == 1.0);
        return c;
    }

private:
    std::vector<double> values_;
    std::vector<double> sorted_;
};

// alpha in (0, 1/2]; every guarantee holds with probability >= 1 - alpha.
class SignificanceLevel {
public:
    explicit SignificanceLevel(double alpha) : alpha_(alpha) {
        if (!(alpha > 0.0 && alpha <= 0.5)) {
            throw std::domain_error("significance level must lie in (0, 0.5], got " +
                                    std::to_string(alpha));
        }
    }

    double value() const { return alpha_; }

private:
    double alpha_;
};

// Grid 0 = tau_0 <= ... <= tau_K = 1 used by the moment bounds.
class Partition {
public:
    explicit Partition(std::vector<double> knots) : knots_(std::move(knots)) {
        if (knots_.size() < 2) {
            throw std::domain_error("partition needs at least two knots");
        }
        if (knots_.front() != 0.0 || knots_.back() != 1.0) {
            throw std::domain_error("partition must start at 0 and end at 1");
        }
        double width_sum = 0.0;
        for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
            if (knots_[i + 1] < knots_[i]) {
                throw std::domain_error("partition knots must be non-decreasing");
            }
            width_sum += knots_[i + 1] - knots_[i];
        }
        if (std::abs(width_sum - 1.0) > 1e-12) {
            throw std::domain_error("partition widths must sum to 1");
        }
    }

    static Partition uniform(std::size_t cells) {
        if (cells == 0) throw std::domain_error("partition needs at least one cell");
        std::vector<double> knots(cells + 1);
        for (std::size_t j = 0; j <= cells; ++j) {
            knots[j] = static_cast<double>(j) / static_cast<double>(cells);
        }
        knots.back() = 1.0;
        return Partition(std::move(knots));
    }

    // Knots at the sorted unique sample values plus {0, 1}.
    static Partition adapted(const SampleSet& samples) {
        std::vector<double> knots;
        knots.reserve(samples.size() + 2);
        knots.push_back(0.0);
        for (double v : samples.sorted()) {
            if (v != knots.back()) knots.push_back(v);
        }
        if (knots.back() != 1.0) knots.push_back(1.0);
        return Partition(std::move(knots));
    }

    std::size_t cells() const { return knots_.size() - 1; }
    const std::vector<double>& knots() const { return knots_; }
    double width(std::size_t i) const { return knots_[i + 1] - knots_[i]; }
    double max_width() const {
        double w = 0.0;
        for (std::size_t i = 0; i < cells(); ++i) w = std::max(w, width(i));
        return w;
    }

    friend bool operator==(const Partition& a, const Partition& b) {
        return a.knots_ == b.knots_;
    }

private:
    std::vector<double> knots_;
};

}  // namespace probe
