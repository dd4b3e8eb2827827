#include "vsad/rng.hpp"

#include <cmath>
#include <numbers>

#include "vsad/error.hpp"

namespace vsad {

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw Error(ErrorCode::InvalidModel, "below(0) is undefined");
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
        std::uint64_t r = next_u64();
        if (r >= threshold) return r % n;
    }
}

double Rng::next_normal() {
    if (have_cached_normal_) {
        have_cached_normal_ = false;
        return cached_normal_;
    }
    // u1 in (0, 1]; avoids log(0).
    double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    cached_normal_ = r * std::sin(theta);
    have_cached_normal_ = true;
    return r * std::cos(theta);
}

std::size_t Rng::categorical(std::span<const double> weights) {
    if (weights.empty()) throw Error(ErrorCode::InvalidModel, "empty categorical weights");
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw Error(ErrorCode::InvalidModel, "categorical weights sum to zero");
    double u = next_double() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return i;
    }
    return weights.size() - 1;
}

std::vector<std::size_t> Rng::permutation(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(below(i));
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

}  // namespace vsad
