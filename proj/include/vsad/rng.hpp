#ifndef VSAD_RNG_HPP
#define VSAD_RNG_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace vsad {

// Seedable splitmix64 stream. Every randomized component in the library
// draws from one of these so runs are reproducible from a single 64-bit
// seed. Independent streams are derived with stream(), which mixes the
// parent state with the stream labels; derived streams never share state
// with the parent, so work can be partitioned (e.g. per image) without
// the draw order affecting values.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(mix(seed ^ kGolden)) {}

    // Derives an independent stream keyed by up to three labels.
    // stream(a, b, c) is a pure function of (parent seed, a, b, c).
    Rng stream(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
        std::uint64_t s = state_;
        s = mix(s ^ (kGolden * (a + 1)));
        s = mix(s ^ (kGolden * (b + 2)));
        s = mix(s ^ (kGolden * (c + 3)));
        return Rng(FromState{}, s);
    }

    std::uint64_t next_u64() {
        state_ += kGolden;
        return mix(state_);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [0, n) without modulo bias (rejection sampling).
    std::uint64_t below(std::uint64_t n);

    // Standard normal via Box-Muller; second value of each pair is cached.
    double next_normal();

    // Index draw from unnormalized non-negative weights.
    std::size_t categorical(std::span<const double> weights);

    // Fisher-Yates shuffle of [0, n) index vector.
    std::vector<std::size_t> permutation(std::size_t n);

private:
    struct FromState {};
    Rng(FromState, std::uint64_t s) : state_(s) {}

    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

    static std::uint64_t mix(std::uint64_t z) {
        z += kGolden;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    bool have_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

}  // namespace vsad

#endif
