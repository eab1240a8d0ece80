#include "ambs/random.hpp"

#include <algorithm>

namespace ambs {

namespace {

std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::size_t last_positive(std::span<const double> probs) {
    for (std::size_t i = probs.size(); i-- > 0;) {
        if (probs[i] > 0.0) return i;
    }
    return probs.empty() ? 0 : probs.size() - 1;
}

}  // namespace

SplitMix64 make_stream(std::uint64_t seed, Stream purpose, std::uint64_t iteration, std::uint64_t index) {
    std::uint64_t h = mix(seed + 0x9e3779b97f4a7c15ULL);
    h = mix(h ^ (static_cast<std::uint64_t>(purpose) * 0xd1b54a32d192ed03ULL));
    h = mix(h ^ (iteration * 0xabc98388fb8fac03ULL + 0x8cb92ba72f3d8dd7ULL));
    h = mix(h ^ (index * 0x9fb21c651e98df25ULL + 0x2545f4914f6cdd1dULL));
    return SplitMix64{h};
}

std::size_t sample_categorical(std::span<const double> probs, double u) {
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    return last_positive(probs);
}

std::size_t sample_cumulative(std::span<const double> cdf, double u) {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it != cdf.end()) return static_cast<std::size_t>(it - cdf.begin());
    // u landed in the rounding gap above the final cumulative value.
    for (std::size_t i = cdf.size(); i-- > 1;) {
        if (cdf[i] > cdf[i - 1]) return i;
    }
    return 0;
}

}  // namespace ambs
