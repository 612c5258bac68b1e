#include "iqo/protocol.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "iqo/errors.hpp"

namespace iqo {

namespace {

bool positive_finite(double x) { return x > 0.0 && std::isfinite(x); }

} // namespace

void CycleConfig::validate() const {
    if (!(chi >= 0.0) || !std::isfinite(chi)) throw InvalidArgument("cycle: chi must be finite and >= 0");
    if (!positive_finite(bz_max)) throw InvalidArgument("cycle: bz_max must be positive");
    if (!positive_finite(tau1) || !positive_finite(tau2) || !positive_finite(tau3))
        throw InvalidArgument("cycle: durations must be positive");
    if (!positive_finite(dt_max)) throw InvalidArgument("cycle: dt_max must be positive");
}

double acceptance_tolerance(const SkInstance& inst) { return 1e-9 * static_cast<double>(inst.n()) * inst.j_scale(); }

CycleResult run_cycle(const SkInstance& inst, const LocalMinimum& ref, const CycleConfig& cfg) {
    cfg.validate();
    if (ref.config.size() != inst.n()) throw InvalidArgument("run_cycle: reference size mismatch");
    if (!is_single_flip_stable(inst, ref.config))
        throw InvalidArgument("run_cycle: reference is not single-flip stable");

    const ReferenceHamiltonian h(inst, ref.config);
    const FieldPoint top(cfg.bz_max, 0.0);
    const FieldPoint corner(cfg.bz_max, cfg.chi * cfg.bz_max);
    const FieldPoint origin(0.0, 0.0);

    // Step 1 with B_x = 0 is diagonal: the reference basis state only picks up a phase.
    const auto v1 = QuantumState::basis(ref.config);
    const ScheduleSegment steps23[] = {{top, corner, cfg.tau2}, {corner, origin, cfg.tau3}};
    const auto evolved = evolve(h, steps23, v1, cfg.dt_max);

    CycleResult r;
    r.chi = cfg.chi;
    r.bz_max = cfg.bz_max;
    r.norm_drift = evolved.norm_drift;
    r.measured = measure(evolved.state, derive_seed(cfg.seed, 0));
    r.descended = greedy_descent(inst, r.measured, derive_seed(cfg.seed, 1));
    r.energy_before = ref.energy;
    r.energy_after = r.descended.energy;
    r.accepted = r.energy_after < r.energy_before - acceptance_tolerance(inst);

    if (cfg.gap_grid > 0 && cfg.chi > 0.0) {
        std::vector<double> grid(cfg.gap_grid);
        for (std::size_t i = 0; i < grid.size(); ++i)
            grid[i] = cfg.bz_max * static_cast<double>(grid.size() - i) / static_cast<double>(grid.size());
        r.min_gap_seen = min_gap_along_ray(h, cfg.chi, grid).gap;
    }
    return r;
}

double default_bz_max(const SkInstance& inst, const SpinConfig& ref) {
    const ReferenceHamiltonian h(inst, ref);
    return 2.0 * std::max(classical_critical_field(h), inst.j_scale());
}

double suggest_tau3(double gap, double c, double cap) {
    if (!(gap > 0.0)) return cap;
    return std::min(cap, c / (gap * gap));
}

CycleOutcome classify(const CycleResult& r, double tolerance) {
    if (r.accepted) return CycleOutcome::Lower;
    if (r.energy_after > r.energy_before + tolerance) return CycleOutcome::Higher;
    return CycleOutcome::SelfReturn;
}

double tune_chi(std::span<const CycleResult> history, double current_chi, const TunerPolicy& policy,
                double tolerance) {
    if (history.empty()) throw InvalidArgument("tune_chi: needs at least one completed cycle");
    if (!policy.enabled || policy.patience == 0) return current_chi;

    std::size_t streak = 0;
    std::optional<CycleOutcome> signal;
    for (auto it = history.rbegin(); it != history.rend() && streak < policy.patience; ++it) {
        if (it->chi != current_chi) break;
        const auto outcome = classify(*it, tolerance);
        if (outcome == CycleOutcome::Lower) return current_chi;
        if (signal && *signal != outcome) return current_chi;
        signal = outcome;
        ++streak;
    }
    if (streak < policy.patience) return current_chi;

    double next = current_chi;
    if (*signal == CycleOutcome::SelfReturn) next = current_chi * (1.0 + policy.up);
    if (*signal == CycleOutcome::Higher) next = current_chi * (1.0 - policy.down);
    return std::clamp(next, policy.chi_min, policy.chi_max);
}

double RunRecord::acceptance_fraction() const {
    if (cycles.empty()) return 0.0;
    const auto accepted = std::count_if(cycles.begin(), cycles.end(), [](const CycleResult& c) { return c.accepted; });
    return static_cast<double>(accepted) / static_cast<double>(cycles.size());
}

RunRecord iterate(const SkInstance& inst, const SpinConfig& start, const CycleConfig& cfg0, int budget,
                  const TunerPolicy& tuner, const IterateOptions& opt) {
    if (budget < 1) throw InvalidArgument("iterate: budget must be >= 1");
    cfg0.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const double tol = acceptance_tolerance(inst);

    RunRecord rec;
    rec.n = inst.n();
    rec.instance_seed = inst.seed();
    rec.ground_energy = opt.ground_energy;
    rec.cycle_time = cfg0.tau1 + cfg0.tau2 + cfg0.tau3;

    LocalMinimum ref = simulated_anneal(inst, start, opt.sa_sweeps, opt.sa_t_hot, opt.sa_t_cold,
                                        derive_seed(cfg0.seed, 0x5a));
    rec.initial_reference = ref;
    rec.reference_energy_trace.push_back(ref.energy);

    auto at_ground = [&] { return opt.ground_energy && ref.energy <= *opt.ground_energy + tol; };

    CycleConfig cfg = cfg0;
    if (opt.auto_bz_max) cfg.bz_max = default_bz_max(inst, ref.config);
    for (int c = 0; c < budget && !at_ground(); ++c) {
        cfg.seed = derive_seed(cfg0.seed, static_cast<std::uint64_t>(c) + 1);
        auto result = run_cycle(inst, ref, cfg);
        rec.chi_trace.push_back(cfg.chi);
        if (result.accepted) {
            ref = result.descended;
            if (opt.auto_bz_max) cfg.bz_max = default_bz_max(inst, ref.config);
        }
        rec.cycles.push_back(std::move(result));
        rec.reference_energy_trace.push_back(ref.energy);
        cfg.chi = tune_chi(rec.cycles, cfg.chi, tuner, tol);
    }

    rec.final_reference = ref;
    rec.n_c = rec.cycles.size();
    rec.simulated_time = static_cast<double>(rec.n_c) * rec.cycle_time;
    rec.reached_ground = at_ground();
    rec.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

} // namespace iqo
