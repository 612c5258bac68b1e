#pragma once

#include <cstdint>
#include <limits>
#include <optional>

namespace iqo {

/// SplitMix64 mixing step (Steele, Lea, Flood 2014). Used for seeding and for
/// deriving independent child seeds from (seed, stream) pairs.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Derive a child seed; distinct `stream` values give decorrelated streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// xoshiro256** 1.0 (Blackman & Vigna), state filled from SplitMix64(seed).
///
/// All sampling helpers below are defined bit-for-bit here rather than through
/// <random> distributions, whose output is implementation-defined:
///  - uniform01: top 53 bits scaled by 2^-53, range [0, 1).
///  - normal:    Box-Muller on (1 - u1, u2); the cosine branch is returned
///               first and the sine branch is cached for the next call.
///  - below(k):  Lemire's multiply-shift with rejection, unbiased.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    double uniform01() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }
    double normal() noexcept;
    double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }
    std::uint64_t below(std::uint64_t bound) noexcept;
    /// Binomial(n, 1/2) as the popcount of n fair random bits.
    int binomial_half(int n) noexcept;

private:
    std::uint64_t s_[4];
    std::optional<double> spare_;
};

} // namespace iqo
