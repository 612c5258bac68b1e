#pragma once

#include <cstdint>
#include <vector>

#include "iqo/sk.hpp"

namespace iqo {

/// Largest n accepted by the exhaustive 2^n scans.
inline constexpr std::size_t kMaxEnumerationSpins = 20;

/// First-improvement descent over a seed-shuffled site order; flips only on
/// strictly negative delta, so zero-delta plateaus terminate.
LocalMinimum greedy_descent(const SkInstance& inst, const SpinConfig& start, std::uint64_t seed);

/// Metropolis single-flip annealing, n random-site attempts per sweep, with a
/// geometric temperature schedule from t_hot to t_cold, finished by
/// greedy_descent. t_hot == 0 is exactly greedy_descent. A zero t_cold with
/// positive t_hot ends the geometric ramp at 1e-3 * t_hot.
LocalMinimum simulated_anneal(const SkInstance& inst, const SpinConfig& start, int sweeps,
                              double t_hot, double t_cold, std::uint64_t seed);

/// All single-flip-stable configurations, ascending by energy (ties by basis
/// index). Both members of each global-flip pair are listed. n <= 20.
std::vector<LocalMinimum> enumerate_minima(const SkInstance& inst);

/// Endpoint of steepest descent (most negative delta, lowest site on ties).
/// Deterministic; `seed` is accepted for interface symmetry and unused.
LocalMinimum basin_of(const SkInstance& inst, const SpinConfig& c, std::uint64_t seed = 0);

/// For each basis index, the position in `minima` of its basin_of endpoint.
/// `minima` must contain every single-flip-stable configuration (e.g. the
/// output of enumerate_minima). n <= 20.
std::vector<std::size_t> basin_partition(const SkInstance& inst, const std::vector<LocalMinimum>& minima);

/// Exhaustive ground-state energy (n <= 20).
double ground_state_energy(const SkInstance& inst);

} // namespace iqo
