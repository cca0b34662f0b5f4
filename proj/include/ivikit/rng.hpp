#pragma once

// Seedable randomness with a fully documented algorithm so that other
// implementations can reproduce every draw:
//
//   engine        std::mt19937_64 (its output sequence is fixed by the C++ standard)
//   sub-seeds     derive_seed(master, index) = splitmix64(master ^ splitmix64(index + 1))
//   uniform01     (next_u64() >> 11) * 2^-53, in [0, 1)
//   below(n)      rejection sampling on next_u64(): reject x < (2^64 - n) mod n, return x mod n
//   normal        Box-Muller, one value per call: sqrt(-2 ln(1 - u1)) * cos(2 pi u2)
//   shuffle       Fisher-Yates from the back: for i = n-1 .. 1 swap(i, below(i + 1))
//
// std::*_distribution is deliberately not used: its output is implementation-defined.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <utility>

namespace ivikit {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Sub-seed for replicate/run/epoch `index` under `master`. Pure function of both.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return splitmix64(master ^ splitmix64(index + 1));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t x = next_u64();
            if (x >= threshold) return x % n;
        }
    }

    double normal() {
        const double u1 = 1.0 - uniform01();  // (0, 1]
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    template <class T>
    void shuffle(std::span<T> values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace ivikit
