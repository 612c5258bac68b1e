#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iqo/rng.hpp"

namespace iqo {

/// Ising configuration with entries in {+1, -1}, stored as packed bits.
///
/// Bit convention (used by every file format and by basis-state indices):
/// bit i of the packed word is 0 for s_i = +1 and 1 for s_i = -1.
class SpinConfig {
public:
    SpinConfig() = default;
    /// All spins +1.
    explicit SpinConfig(std::size_t n);

    static SpinConfig from_spins(std::span<const int> spins);
    /// Basis-state index with bit i = spin i; requires n <= 64.
    static SpinConfig from_index(std::size_t n, std::uint64_t index);
    /// Hex of the packed integer, most significant digit first (as produced by to_hex).
    static SpinConfig from_hex(std::size_t n, std::string_view hex);
    static SpinConfig random(std::size_t n, Rng& rng);

    std::size_t size() const noexcept { return n_; }
    int operator[](std::size_t i) const noexcept {
        return (words_[i >> 6] >> (i & 63)) & 1U ? -1 : +1;
    }
    void flip(std::size_t i) noexcept { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }
    SpinConfig flipped(std::size_t i) const;
    /// Global spin flip.
    SpinConfig operator-() const;

    std::uint64_t index() const;
    std::string to_hex() const;
    std::vector<int> spins() const;
    std::span<const std::uint64_t> words() const noexcept { return words_; }

    friend bool operator==(const SpinConfig&, const SpinConfig&) = default;

private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> words_;
};

/// One SK task: dense symmetric couplings with zero diagonal.
class SkInstance {
public:
    /// Validates shape, symmetry, zero diagonal and finiteness.
    SkInstance(std::size_t n, double j_scale, std::uint64_t seed, std::vector<double> couplings);

    std::size_t n() const noexcept { return n_; }
    double j_scale() const noexcept { return j_scale_; }
    std::uint64_t seed() const noexcept { return seed_; }
    double coupling(std::size_t i, std::size_t j) const noexcept { return couplings_[i * n_ + j]; }
    std::span<const double> row(std::size_t i) const noexcept {
        return {couplings_.data() + i * n_, n_};
    }
    std::span<const double> couplings() const noexcept { return couplings_; }

private:
    std::size_t n_;
    double j_scale_;
    std::uint64_t seed_;
    std::vector<double> couplings_;
};

/// Single-flip-stable configuration with its energy.
struct LocalMinimum {
    SpinConfig config;
    double energy = 0.0;
    double per_spin_energy = 0.0; ///< energy / (n J)
};

/// J_ij for i<j drawn i.i.d. from N(0, j_scale^2 / n) (row by row, j ascending), mirrored.
SkInstance generate_instance(std::size_t n, double j_scale, std::uint64_t seed);

/// E = sum over *ordered* pairs (i, j) of J_ij s_i s_j, i.e. twice the i<j sum.
double energy(const SkInstance& inst, const SpinConfig& c);

/// h_i = sum_j J_ij s_j.
double local_field(const SkInstance& inst, const SpinConfig& c, std::size_t site);

/// energy(flip(c, site)) - energy(c) = -4 s_site h_site, in O(n).
double energy_delta(const SkInstance& inst, const SpinConfig& c, std::size_t site);

std::size_t hamming(const SpinConfig& a, const SpinConfig& b);

/// m = (1/n) sum_i s_i^l s_i^r = 1 - 2 d / n.
double overlap_slope(const SpinConfig& l, const SpinConfig& r);

LocalMinimum make_minimum(const SkInstance& inst, SpinConfig c);

/// Every single flip is non-improving (delta >= 0).
bool is_single_flip_stable(const SkInstance& inst, const SpinConfig& c);

} // namespace iqo
