#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>

namespace ambs {

/// SplitMix64 bit generator. Eight bytes of state, so every Monte-Carlo sample
/// can own a stream without the setup cost of a Mersenne twister.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed) : _state{seed} {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        std::uint64_t z = (_state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(operator()() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be positive.
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

private:
    std::uint64_t _state;
};

/// Purpose tags for stream derivation. Values are part of the reproducibility
/// contract: changing them changes every seeded result.
enum class Stream : std::uint64_t {
    Environment = 1,
    EpisodeReset = 2,
    TaskAction = 3,
    SafeAction = 4,
    ShieldTrace = 5,
    TaskImagination = 6,
    SafeImagination = 7,
    CriticImagination = 8,
    ReplaySample = 9,
    Estimate = 10,
    Generator = 11,
};

/// Counter-based stream derivation: the stream for (seed, purpose, iteration, index)
/// is independent of how many draws any other stream has made.
SplitMix64 make_stream(std::uint64_t seed, Stream purpose, std::uint64_t iteration = 0, std::uint64_t index = 0);

/// Inverse-CDF draw from an explicit probability vector. Rounding slack at the
/// tail falls on the last index with positive mass.
std::size_t sample_categorical(std::span<const double> probs, double u);

/// Same draw from a precomputed cumulative vector (last entry ~1).
std::size_t sample_cumulative(std::span<const double> cdf, double u);

}  // namespace ambs
