#pragma once

// Counter-based pseudorandom generator with splittable streams. Output i of a
// stream is a pure function of (seed, stream, i), so trial t of a simulation
// can be reproduced without replaying trials 0..t-1.

#include <cstdint>

namespace probe {

class CounterRng {
public:
    // Identity string recorded in reports alongside seeds.
    static constexpr const char* kName = "splitmix64-counter/1";

    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix(mix(seed + kGamma) + stream * kGamma)) {}

    // Independent stream derived from this generator's key; does not consume
    // or disturb this generator's counter.
    CounterRng split(std::uint64_t stream) const {
        CounterRng child(0);
        child.key_ = mix(mix(key_ + kGamma) + stream * kGamma);
        child.counter_ = 0;
        return child;
    }

    std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGamma); }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, bound) via rejection-free Lemire reduction.
    std::uint64_t next_below(std::uint64_t bound) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace probe
