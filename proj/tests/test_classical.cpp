#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "iqo/classical.hpp"
#include "iqo/errors.hpp"
#include "oracles.hpp"

using namespace iqo;

TEST_SUITE("classical") {

TEST_CASE("greedy descent leaves a minimum in place") {
    const auto inst = generate_instance(10, 1.0, 4);
    for (const auto& m : enumerate_minima(inst)) {
        const auto r = greedy_descent(inst, m.config, 99);
        CHECK(r.config == m.config);
        CHECK(r.energy == doctest::Approx(m.energy));
    }
}

TEST_CASE("greedy descent lands in the oracle minima set") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto inst = generate_instance(3, 1.0, seed);
        const auto stable = oracle::stable_configs(inst);
        for (std::uint64_t a = 0; a < 8; ++a) {
            const auto start = SpinConfig::from_index(3, a);
            const auto r = greedy_descent(inst, start, seed);
            CHECK(std::binary_search(stable.begin(), stable.end(), r.config.index()));
            CHECK(r.energy <= energy(inst, start) + 1e-12);
        }
    }
}

TEST_CASE("greedy descent endpoints are reachable by strict descent") {
    const auto inst = generate_instance(8, 1.0, 31);
    Rng rng(2);
    for (int t = 0; t < 40; ++t) {
        const auto start = SpinConfig::random(8, rng);
        const auto r = greedy_descent(inst, start, t);
        const auto ends = oracle::descent_endpoints(inst, start.index());
        CHECK(std::binary_search(ends.begin(), ends.end(), r.config.index()));
        CHECK(is_single_flip_stable(inst, r.config));
        CHECK(r.per_spin_energy == doctest::Approx(r.energy / 8.0));
    }
}

TEST_CASE("simulated annealing schedule validation and zero-temperature limit") {
    const auto inst = generate_instance(12, 1.0, 8);
    Rng rng(1);
    const auto start = SpinConfig::random(12, rng);
    CHECK_THROWS_AS(simulated_anneal(inst, start, 0, 1.0, 0.1, 1), InvalidArgument);
    CHECK_THROWS_AS(simulated_anneal(inst, start, 10, 0.1, 1.0, 1), InvalidArgument);
    CHECK_THROWS_AS(simulated_anneal(inst, start, 10, 1.0, -0.1, 1), InvalidArgument);
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto a = simulated_anneal(inst, start, 50, 0.0, 0.0, s);
        const auto g = greedy_descent(inst, start, s);
        CHECK(a.config == g.config);
    }
    const auto x = simulated_anneal(inst, start, 100, 2.0, 0.05, 17);
    const auto y = simulated_anneal(inst, start, 100, 2.0, 0.05, 17);
    CHECK(x.config == y.config);
    CHECK(is_single_flip_stable(inst, x.config));
    CHECK(is_single_flip_stable(inst, simulated_anneal(inst, start, 100, 2.0, 0.0, 3).config));
}

TEST_CASE("simulated annealing finds the ground state for most seeds at n = 10") {
    const auto inst = generate_instance(10, 1.0, 123);
    const double gs = oracle::ground_energy(inst);
    int hits = 0;
    const int seeds = 50;
    Rng rng(4);
    for (int s = 0; s < seeds; ++s) {
        const auto r = simulated_anneal(inst, SpinConfig::random(10, rng), 500, 3.0, 0.02, 1000 + s);
        hits += r.energy <= gs + 1e-9;
    }
    CHECK(hits >= 40); // >= 80 %
}

TEST_CASE("two-spin ferro/antiferro enumeration") {
    // J12 > 0 favours anti-alignment: (+,-) and (-,+).
    const SkInstance inst(2, 1.0, 0, {0.0, 0.7, 0.7, 0.0});
    const auto mins = enumerate_minima(inst);
    REQUIRE(mins.size() == 2);
    std::set<std::uint64_t> idx{mins[0].config.index(), mins[1].config.index()};
    CHECK(idx == std::set<std::uint64_t>{1, 2});
    CHECK(mins[0].energy == doctest::Approx(-1.4));
}

TEST_CASE("enumerated minima equal the brute-force stable set") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto inst = generate_instance(4 + seed % 7, 1.0, seed);
        const auto mins = enumerate_minima(inst);
        const auto stable = oracle::stable_configs(inst);
        std::vector<std::uint64_t> got;
        for (const auto& m : mins) {
            got.push_back(m.config.index());
            CHECK(is_single_flip_stable(inst, m.config));
            for (std::size_t i = 0; i < inst.n(); ++i) CHECK(energy_delta(inst, m.config, i) > 0.0);
        }
        CHECK(std::is_sorted(mins.begin(), mins.end(),
                             [](const auto& a, const auto& b) { return a.energy < b.energy; }));
        std::sort(got.begin(), got.end());
        CHECK(got == stable);
        CHECK(mins.front().energy == doctest::Approx(oracle::ground_energy(inst)));
        // Global-flip partners appear with equal energy.
        for (const auto& m : mins) {
            const auto partner = (-m.config).index();
            CHECK(std::binary_search(got.begin(), got.end(), partner));
        }
    }
    CHECK_THROWS_AS(enumerate_minima(generate_instance(21, 1.0, 1)), ResourceLimit);
}

TEST_CASE("basins from steepest descent") {
    const auto inst = generate_instance(8, 1.0, 55);
    const auto mins = enumerate_minima(inst);
    std::set<std::uint64_t> min_idx;
    for (const auto& m : mins) min_idx.insert(m.config.index());

    for (const auto& m : mins) CHECK(basin_of(inst, m.config).config == m.config);

    for (std::uint64_t a = 0; a < 256; ++a) {
        const auto c = SpinConfig::from_index(8, a);
        const auto b = basin_of(inst, c);
        CHECK(min_idx.count(b.config.index()) == 1);
        CHECK(basin_of(inst, b.config).config == b.config);
        CHECK(basin_of(inst, c, 7).config == b.config);
        const auto ends = oracle::descent_endpoints(inst, a);
        CHECK(std::binary_search(ends.begin(), ends.end(), b.config.index()));
    }

    // Neighbours of the ground state whose every descending path ends there.
    const auto gs = mins.front().config;
    int checked = 0;
    for (std::size_t i = 0; i < 8; ++i) {
        const auto nb = gs.flipped(i);
        const auto ends = oracle::descent_endpoints(inst, nb.index());
        if (ends.size() == 1 && ends[0] == gs.index()) {
            CHECK(basin_of(inst, nb).config == gs);
            ++checked;
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("basin partition covers every configuration once") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto inst = generate_instance(10, 1.0, 70 + seed);
        const auto mins = enumerate_minima(inst);
        const auto part = basin_partition(inst, mins);
        REQUIRE(part.size() == 1024);
        std::vector<std::size_t> sizes(mins.size(), 0);
        for (std::uint64_t a = 0; a < 1024; ++a) {
            REQUIRE(part[a] < mins.size());
            ++sizes[part[a]];
            CHECK(basin_of(inst, SpinConfig::from_index(10, a)).config == mins[part[a]].config);
        }
        std::size_t total = 0;
        for (auto s : sizes) {
            CHECK(s >= 1);
            total += s;
        }
        CHECK(total == 1024);
    }
}

} // TEST_SUITE
