#include "iqo/classical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "iqo/errors.hpp"

namespace iqo {

namespace {

void require_match(const SkInstance& inst, const SpinConfig& c) {
    if (c.size() != inst.n()) throw InvalidArgument("configuration length does not match instance size");
}

void require_enumerable(const SkInstance& inst, const char* what) {
    if (inst.n() > kMaxEnumerationSpins)
        throw ResourceLimit(std::string(what) + ": n = " + std::to_string(inst.n()) +
                            " exceeds the exhaustive-scan limit of " + std::to_string(kMaxEnumerationSpins));
}

// Fields h_i = sum_j J_ij s_j for the whole configuration.
std::vector<double> local_fields(const SkInstance& inst, const SpinConfig& c) {
    std::vector<double> h(inst.n());
    for (std::size_t i = 0; i < inst.n(); ++i) h[i] = local_field(inst, c, i);
    return h;
}

void apply_flip(const SkInstance& inst, SpinConfig& c, std::vector<double>& h, std::size_t k) {
    const double ds = -2.0 * c[k]; // new s_k minus old s_k
    c.flip(k);
    const auto row = inst.row(k);
    for (std::size_t j = 0; j < h.size(); ++j) h[j] += row[j] * ds;
}

} // namespace

LocalMinimum greedy_descent(const SkInstance& inst, const SpinConfig& start, std::uint64_t seed) {
    require_match(inst, start);
    const std::size_t n = inst.n();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    SpinConfig c = start;
    bool improved = true;
    while (improved) {
        improved = false;
        for (std::size_t site : order) {
            // Exact field each time: stability is decided on the same arithmetic
            // as is_single_flip_stable.
            if (c[site] * local_field(inst, c, site) > 0.0) {
                c.flip(site);
                improved = true;
            }
        }
    }
    return make_minimum(inst, std::move(c));
}

LocalMinimum simulated_anneal(const SkInstance& inst, const SpinConfig& start, int sweeps,
                              double t_hot, double t_cold, std::uint64_t seed) {
    require_match(inst, start);
    if (sweeps < 1) throw InvalidArgument("simulated_anneal: sweeps must be >= 1");
    if (!(t_cold >= 0.0) || !(t_hot >= t_cold) || !std::isfinite(t_hot))
        throw InvalidArgument("simulated_anneal: need t_hot >= t_cold >= 0");
    if (t_hot == 0.0) return greedy_descent(inst, start, seed);

    const std::size_t n = inst.n();
    const double t_end = t_cold > 0.0 ? t_cold : 1e-3 * t_hot;
    const double ratio = sweeps > 1 ? std::pow(t_end / t_hot, 1.0 / (sweeps - 1)) : 1.0;

    Rng rng(seed);
    SpinConfig c = start;
    std::vector<double> h = local_fields(inst, c);
    double temperature = t_hot;
    for (int sweep = 0; sweep < sweeps; ++sweep, temperature *= ratio) {
        const double beta = 1.0 / temperature;
        for (std::size_t attempt = 0; attempt < n; ++attempt) {
            const auto k = static_cast<std::size_t>(rng.below(n));
            const double delta = -4.0 * c[k] * h[k];
            if (delta <= 0.0 || rng.uniform01() < std::exp(-beta * delta)) apply_flip(inst, c, h, k);
        }
    }
    return greedy_descent(inst, c, derive_seed(seed, 1));
}

std::vector<LocalMinimum> enumerate_minima(const SkInstance& inst) {
    require_enumerable(inst, "enumerate_minima");
    const std::size_t n = inst.n();
    const std::uint64_t count = std::uint64_t{1} << n;
    std::vector<LocalMinimum> out;
    std::vector<int> s(n);
    for (std::uint64_t idx = 0; idx < count; ++idx) {
        for (std::size_t i = 0; i < n; ++i) s[i] = ((idx >> i) & 1U) ? -1 : 1;
        bool stable = true;
        for (std::size_t i = 0; i < n && stable; ++i) {
            const auto row = inst.row(i);
            double h = 0.0;
            for (std::size_t j = 0; j < n; ++j) h += row[j] * s[j];
            stable = s[i] * h <= 0.0;
        }
        if (stable) out.push_back(make_minimum(inst, SpinConfig::from_index(n, idx)));
    }
    std::sort(out.begin(), out.end(), [](const LocalMinimum& a, const LocalMinimum& b) {
        if (a.energy != b.energy) return a.energy < b.energy;
        return a.config.index() < b.config.index();
    });
    return out;
}

LocalMinimum basin_of(const SkInstance& inst, const SpinConfig& c, std::uint64_t /*seed*/) {
    require_match(inst, c);
    const std::size_t n = inst.n();
    SpinConfig cur = c;
    for (;;) {
        double best = 0.0;
        std::size_t best_site = n;
        for (std::size_t i = 0; i < n; ++i) {
            const double delta = -4.0 * cur[i] * local_field(inst, cur, i);
            if (delta < best) {
                best = delta;
                best_site = i;
            }
        }
        if (best_site == n) break;
        cur.flip(best_site);
    }
    return make_minimum(inst, std::move(cur));
}

std::vector<std::size_t> basin_partition(const SkInstance& inst, const std::vector<LocalMinimum>& minima) {
    require_enumerable(inst, "basin_partition");
    std::unordered_map<std::uint64_t, std::size_t> id_of;
    for (std::size_t k = 0; k < minima.size(); ++k) id_of.emplace(minima[k].config.index(), k);

    const std::size_t n = inst.n();
    const std::uint64_t count = std::uint64_t{1} << n;
    std::vector<std::size_t> owner(count);
    for (std::uint64_t idx = 0; idx < count; ++idx) {
        const auto end = basin_of(inst, SpinConfig::from_index(n, idx)).config.index();
        const auto it = id_of.find(end);
        if (it == id_of.end())
            throw InvalidArgument("basin_partition: descent endpoint missing from the minima list");
        owner[idx] = it->second;
    }
    return owner;
}

double ground_state_energy(const SkInstance& inst) {
    const auto minima = enumerate_minima(inst);
    return minima.front().energy;
}

} // namespace iqo
