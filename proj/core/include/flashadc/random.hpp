#pragma once

#include <cstdint>
#include <limits>
#include <cmath>

namespace flashadc {

/// SplitMix64 finalizer. Used to derive independent stream seeds from a
/// master seed so results depend on (seed, index) only, never on scheduling.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0) noexcept {
    return mix64(mix64(master ^ mix64(stream)) + index);
}

// Stream tags for derive_seed.
inline constexpr std::uint64_t kInstanceStream = 0x1157A4CEULL;
inline constexpr std::uint64_t kSampleStream = 0x5A3F1EULL;
inline constexpr std::uint64_t kTrialStream = 0x7121A1ULL;
inline constexpr std::uint64_t kPointStream = 0x9014E7ULL;

/// Cheap counter-style engine: a fresh one per conversion keeps every sample
/// reproducible from its index. Satisfies UniformRandomBitGenerator.
class SampleRng {
public:
    using result_type = std::uint64_t;

    explicit SampleRng(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    bool coin() noexcept { return ((*this)() >> 63) != 0; }

    /// Standard normal via Box-Muller; no cached state so draws stay independent of call history.
    double normal() noexcept {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

private:
    std::uint64_t state_;
};

}  // namespace flashadc
