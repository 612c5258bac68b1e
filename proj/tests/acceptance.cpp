// Acceptance run: one PASS/FAIL line per criterion, tolerances fixed below.
// Exits non-zero if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "iqo/basin_model.hpp"
#include "iqo/classical.hpp"
#include "iqo/protocol.hpp"
#include "iqo/quantum.hpp"
#include "oracles.hpp"

using namespace iqo;

namespace {

int failures = 0;

void report(bool ok, const char* name, const std::string& detail) {
    std::printf("%s  %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
    std::fflush(stdout);
    failures += !ok;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

double slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void classical_limit() {
    constexpr double tol = 1e-10;
    Stopwatch clock;
    Rng rng(77);
    double worst = 0.0;
    for (std::uint64_t k = 0; k < 20; ++k) {
        const std::size_t n = 4 + k % 7;
        const auto inst = generate_instance(n, 1.0, 500 + k);
        const auto ref = SpinConfig::random(n, rng);
        const auto rs = ref.spins();
        for (double bz : {0.0, rng.uniform(0.0, 1.0), rng.uniform(1.0, 5.0)}) {
            const auto s = full_spectrum(inst, ref, FieldPoint(bz, 0.0));
            std::vector<double> d;
            for (std::uint64_t a = 0; a < (std::uint64_t{1} << n); ++a) {
                const auto sa = oracle::spins_of(n, a);
                double ov = 0.0;
                for (std::size_t i = 0; i < n; ++i) ov += sa[i] * rs[i];
                d.push_back(oracle::energy(inst, sa) - bz * ov);
            }
            std::sort(d.begin(), d.end());
            for (std::size_t i = 0; i < d.size(); ++i) worst = std::max(worst, std::abs(s.eigenvalues[i] - d[i]));
        }
    }
    const double t = clock.seconds();
    report(worst <= tol && t < 60.0, "classical-limit spectrum",
           fmt("20 instances n=4..10, max |dev| = %.2e (tol %.0e), %.1f s (limit 60 s)", worst, tol, t));
}

void zeeman_slopes() {
    constexpr double tol = 1e-8;
    std::vector<double> bz;
    for (int k = 0; k <= 20; ++k) bz.push_back(0.13 + 0.147 * k);
    double worst_ref = 0.0, worst_other = 0.0;
    std::size_t levels = 0;
    for (std::uint64_t k = 0; k < 5; ++k) {
        const std::size_t n = 8;
        const auto inst = generate_instance(n, 1.0, 600 + k);
        const auto mins = enumerate_minima(inst);
        const auto& ref = mins.back().config;
        const ReferenceHamiltonian h(inst, ref);
        SpectrumOptions opt;
        opt.want_vectors = true;
        std::vector<std::vector<double>> track(mins.size());
        for (double b : bz) {
            const auto s = full_spectrum(h, FieldPoint(b, 0.0), opt);
            const auto& v = *s.eigenvectors;
            for (std::size_t l = 0; l < mins.size(); ++l) {
                Eigen::Index col = 0;
                v.row(static_cast<Eigen::Index>(mins[l].config.index())).cwiseAbs().maxCoeff(&col);
                track[l].push_back(s.eigenvalues[static_cast<std::size_t>(col)]);
            }
        }
        for (std::size_t l = 0; l < mins.size(); ++l) {
            const double want = -static_cast<double>(n) * overlap_slope(mins[l].config, ref);
            double& worst = mins[l].config == ref ? worst_ref : worst_other;
            worst = std::max(worst, std::abs(slope(bz, track[l]) - want));
            ++levels;
        }
    }
    report(worst_ref <= tol && worst_other <= tol, "zeeman slopes at chi=0",
           fmt("%zu minimum levels on 5 instances n=8: reference |slope+N| = %.1e, others |slope+N m| <= %.1e (tol %.0e)",
               levels, worst_ref, worst_other, tol));
}

void fig5_gaps() {
    Stopwatch clock;
    const std::vector<double> chis{0.1, 0.3, 1.0, 3.0};
    std::vector<double> mean(chis.size(), 0.0);
    bool crossings = true, concave = true;
    constexpr int instances = 20;
    for (std::uint64_t k = 0; k < instances; ++k) {
        const auto inst = generate_instance(10, 1.0, 1000 + k);
        const auto ref = enumerate_minima(inst).back().config;
        const ReferenceHamiltonian h(inst, ref);
        const double bzc = classical_critical_field(h), bzmax = default_bz_max(inst, ref);
        // chi = 0: straight lines, the reference takes over the ground state at bzc.
        auto lowest_index = [&](double b) {
            std::size_t best = 0;
            for (std::size_t a = 1; a < h.dim(); ++a)
                if (h.diagonal(a, b) < h.diagonal(best, b)) best = a;
            return best;
        };
        crossings = crossings && bzc > 0.0 && lowest_index(bzc * 0.99) != ref.index() &&
                    lowest_index(bzc * 1.01) == ref.index();

        std::vector<double> grid;
        for (int g = 0; g < 40; ++g) grid.push_back(bzmax - (bzmax - 0.5 * bzc) * g / 39.0);
        GapOptions o;
        o.refine = true;
        for (std::size_t c = 0; c < chis.size(); ++c) {
            mean[c] += min_gap_along_ray(h, chis[c], grid, o).gap / instances;
            // The ground level along a ray with bx > 0 bends downward.
            if (k < 5) {
                std::vector<double> e;
                for (double b : {0.8 * bzc, bzc, 1.2 * bzc})
                    e.push_back(full_spectrum(h, FieldPoint::on_ray(chis[c], b)).eigenvalues[0]);
                concave = concave && e[0] - 2 * e[1] + e[2] < 0.0;
            }
        }
    }
    bool increasing = true;
    for (std::size_t c = 1; c < chis.size(); ++c) increasing = increasing && mean[c] > mean[c - 1];
    const double t = clock.seconds();
    report(increasing && crossings && concave && t < 600.0, "low-energy spectra at n=10",
           fmt("20 instances; chi=0 reference crossing %s; ground level concave %s; mean min gap "
               "chi=0.1:%.3e 0.3:%.3e 1:%.3e 3:%.3e %s; %.0f s (limit 600 s)",
               crossings ? "yes" : "no", concave ? "yes" : "no", mean[0], mean[1], mean[2], mean[3],
               increasing ? "strictly increasing" : "NOT increasing", t));
}

void self_energy_limits() {
    Rng rng(4242);
    int bad_exact = 0, bad_small = 0, bad_large = 0;
    constexpr int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        const double m = rng.uniform(-1.0, 1.0);
        const double f = rng.uniform(0.25, 0.75);
        const double j = rng.uniform(0.5, 2.0);
        const std::size_t n = 10 + rng.below(990);
        const double N = static_cast<double>(n);
        const BasinCurve c{rng.normal(), m, f};
        // The exact linear regime needs f J + m bz >= 0.
        const double bz = rng.uniform(0.0, m < 0 ? f * j / -m : 5.0 * j);
        const double exact = self_energy(c, n, j, bz, 0.0);
        bad_exact += std::abs(exact + m * N * bz) > 1e-12 * N * std::max(1.0, bz);
        const double bx_small = 0.01 * j;
        const double small = self_energy(c, n, j, 0.0, bx_small);
        bad_small += std::abs(small / (-N * bx_small * bx_small / (2 * f * j)) - 1.0) > 0.01;
        const double bx_large = 100.0 * j;
        const double large = self_energy(c, n, j, 0.0, bx_large);
        bad_large += std::abs(large / (-N * bx_large) - 1.0) > 0.01;
    }
    report(bad_exact + bad_small + bad_large == 0, "self-energy limits",
           fmt("%d random (m, f, J, N): violations bx=0 exact %d, bx/J=0.01 within 1%% %d, bx/J=100 within 1%% %d",
               trials, bad_exact, bad_small, bad_large));
}

void censorship() {
    Stopwatch clock;
    const auto sampler = default_energy_sampler();
    constexpr int ensembles = 10000;
    std::size_t above = 0, below = 0;
    for (std::uint64_t s = 0; s < ensembles; ++s) {
        const double eps_r = -1.45 + 0.05 * static_cast<double>(s % 10);
        const auto ens = sample_ensemble(50 + 10 * (s % 16), 100, sampler, 90000 + s, eps_r);
        const auto cc = count_crossings(ens, 0.0, 40.0, 256);
        above += cc.n_above;
        below += cc.n_below;
    }
    report(above == 0 && below > 0, "no higher level crosses at chi=0",
           fmt("%d ensembles of 100 curves: N_above = %zu, N_below = %zu, %.1f s", ensembles, above, below,
               clock.seconds()));
}

void exponent_round_trip() {
    Stopwatch clock;
    std::vector<double> chis;
    for (double x = 3.7; x < 40.0; x *= 1.15) chis.push_back(x);
    const std::vector<double> eps{-1.4, -1.3, -1.2, -1.1, -1.0};
    auto rel = [](const FitResult& f) {
        return std::max({std::abs(f.gamma / 1.2 - 1), std::abs(f.delta / 2.0 - 1), std::abs(f.chi_c / 3.6 - 1)});
    };
    const double clean = rel(fit_exponents(synthetic_table(1.2, 2.0, 3.6, kSkGroundStateEps, chis, eps)));
    double noisy = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed)
        noisy = std::max(noisy, rel(fit_exponents(synthetic_table(1.2, 2.0, 3.6, kSkGroundStateEps, chis, eps,
                                                                  0.05, seed))));
    const double t = clock.seconds();
    report(clean <= 0.02 && noisy <= 0.10 && t < 60.0, "exponent fit round trip",
           fmt("max rel. error noiseless %.1e (tol 2%%), 5%% noise over 10 seeds %.3f (tol 10%%), %.1f s",
               clean, noisy, t));
}

void end_to_end() {
    Stopwatch clock;
    constexpr int runs = 20;
    int monotone = 0, hits = 0, adiabatic_hits = 0;
    std::ofstream log("acceptance_scaling.csv");
    log << "mode,instance_seed,n,n_c,tau3,simulated_time,reached_ground\n";
    IterateOptions quench;
    quench.sa_t_hot = 0.0;
    quench.sa_t_cold = 0.0;
    quench.sa_sweeps = 1;
    for (std::uint64_t k = 0; k < runs; ++k) {
        const auto inst = generate_instance(10, 1.0, 2000 + k);
        const double e0 = oracle::ground_energy(inst);
        const auto worst = enumerate_minima(inst).back().config;
        IterateOptions opt = quench;
        opt.ground_energy = e0;

        CycleConfig cfg;
        cfg.seed = 100 + k;
        const auto rec = iterate(inst, worst, cfg, 50, TunerPolicy{}, opt);
        bool mono = true;
        for (std::size_t i = 1; i < rec.reference_energy_trace.size(); ++i)
            mono = mono && rec.reference_energy_trace[i] <= rec.reference_energy_trace[i - 1];
        monotone += mono;
        const bool hit = std::abs(rec.final_reference.energy - e0) <= 1e-9;
        hits += hit;
        log << "tuned," << inst.seed() << ",10," << rec.n_c << ',' << cfg.tau3 << ',' << rec.simulated_time << ','
            << hit << '\n';

        CycleConfig slow;
        slow.chi = 3.0;
        slow.tau2 = 200.0;
        slow.tau3 = 2000.0;
        slow.dt_max = 0.1;
        slow.seed = 300 + k;
        const auto arec = iterate(inst, worst, slow, 50, TunerPolicy{}, opt);
        const bool ahit = std::abs(arec.final_reference.energy - e0) <= 1e-9;
        adiabatic_hits += ahit;
        log << "adiabatic," << inst.seed() << ",10," << arec.n_c << ',' << slow.tau3 << ',' << arec.simulated_time
            << ',' << ahit << '\n';
    }
    report(monotone == runs && hits >= 14 && adiabatic_hits >= 19, "end-to-end optimization at n=10",
           fmt("20 instances, budget 50, tuner defaults, start at highest minimum: trace non-increasing %d/20 "
               "(need 20), ground state %d/20 (need 14); adiabatic control %d/20 (need 19); %.0f s",
               monotone, hits, adiabatic_hits, clock.seconds()));
}

void unitarity_and_sampling() {
    double worst_rate = 0.0;
    for (std::uint64_t k = 0; k < 5; ++k) {
        const auto inst = generate_instance(10, 1.0, 17 + k);
        const auto ref = enumerate_minima(inst).back().config;
        const double bz = default_bz_max(inst, ref);
        const double chi = 0.5 + k;
        const std::vector<ScheduleSegment> seg{{FieldPoint(bz, 0), FieldPoint(bz, chi * bz), 10.0},
                                               {FieldPoint(bz, chi * bz), FieldPoint(0, 0), 50.0}};
        const auto r = evolve(inst, ref, seg, QuantumState::basis(ref), 0.05);
        worst_rate = std::max(worst_rate, r.norm_drift / 60.0);
    }
    Rng rng(2024);
    int passed = 0;
    double min_p = 1.0;
    for (int t = 0; t < 50; ++t) {
        std::vector<Complex> a(16);
        double s = 0.0;
        for (auto& x : a) {
            x = {rng.normal(), rng.normal()};
            s += std::norm(x);
        }
        for (auto& x : a) x /= std::sqrt(s);
        const QuantumState v(4, std::move(a));
        const auto counts = sample_counts(v, 100000, 5000 + t);
        std::vector<double> p(16);
        for (std::size_t i = 0; i < 16; ++i) p[i] = v.probability(i);
        const double pv = oracle::chi_square_p(counts, p);
        min_p = std::min(min_p, pv);
        passed += pv > 0.001;
    }
    report(worst_rate < 1e-9 && passed == 50, "unitarity and Born sampling",
           fmt("norm drift %.1e per unit time (limit 1e-9); chi-square p > 0.001 on %d/50 states, min p %.3f",
               worst_rate, passed, min_p));
}

void declared_out_of_scope() {
    std::ifstream check("acceptance_scaling.csv");
    const bool logged = static_cast<bool>(check);
    report(logged, "declared not reproducible at desk scale",
           std::string("critical exponents of the gap scaling, the N-scaling of the runtime and the annealing-time "
                       "comparison need large N; substituted by the criteria above, (n_c, tau3) per run ") +
               (logged ? "logged to acceptance_scaling.csv" : "NOT logged"));
}

} // namespace

int main() {
    classical_limit();
    zeeman_slopes();
    fig5_gaps();
    self_energy_limits();
    censorship();
    exponent_round_trip();
    end_to_end();
    unitarity_and_sampling();
    declared_out_of_scope();
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
