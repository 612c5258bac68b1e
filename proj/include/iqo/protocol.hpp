#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "iqo/classical.hpp"
#include "iqo/quantum.hpp"
#include "iqo/sk.hpp"

namespace iqo {

/// Parameters of one four-step cycle.
struct CycleConfig {
    double chi = 1.0;    ///< B_x / B_z held during step 3
    double bz_max = 4.0; ///< B_z reached in step 1
    double tau1 = 1.0;   ///< step 1 duration (bookkeeping only; step 1 is exact)
    double tau2 = 10.0;  ///< B_x ramp 0 -> chi * bz_max at fixed B_z
    double tau3 = 50.0;  ///< ramp along the ray down to (0, 0)
    double dt_max = 0.05;
    /// When > 0, step 3's minimum gap is estimated on this many ray points.
    std::size_t gap_grid = 0;
    std::uint64_t seed = 1;

    void validate() const;
};

struct CycleResult {
    SpinConfig measured;
    LocalMinimum descended;
    bool accepted = false;
    double energy_before = 0.0;
    double energy_after = 0.0;
    std::optional<double> min_gap_seen;
    double chi = 0.0;
    double bz_max = 0.0;
    double norm_drift = 0.0;
};

/// Strict-improvement threshold for accepting a new reference: 1e-9 n J.
double acceptance_tolerance(const SkInstance& inst);

/// Steps 1-4. Step 1 is exact (B_x = 0 keeps the basis state); steps 2 and 3
/// are linear ramps integrated by `evolve`; step 4 measures, descends, and
/// accepts iff the descended energy is strictly lower than the reference.
CycleResult run_cycle(const SkInstance& inst, const LocalMinimum& ref, const CycleConfig& cfg);

/// Default B_z cap for a reference: 2 * max(B_z^c(B_x = 0), J).
double default_bz_max(const SkInstance& inst, const SpinConfig& ref);

/// tau3 = c / gap^2, capped.
double suggest_tau3(double gap, double c = 10.0, double cap = 1e4);

struct TunerPolicy {
    bool enabled = true;
    std::size_t patience = 3; ///< consecutive same-signal cycles before a change
    double up = 0.05;         ///< chi *= 1 + up after repeated self-returns
    double down = 0.05;       ///< chi *= 1 - down after repeated higher minima
    double chi_min = 1e-3;
    double chi_max = 1e3;
};

enum class CycleOutcome { Lower, SelfReturn, Higher };

CycleOutcome classify(const CycleResult& r, double tolerance);

/// Next chi from the cycles run since the last change (those with
/// r.chi == current chi). Only the last `patience` of them are inspected.
double tune_chi(std::span<const CycleResult> history, double current_chi, const TunerPolicy& policy,
                double tolerance);

struct IterateOptions {
    int sa_sweeps = 200;
    double sa_t_hot = 2.0;
    double sa_t_cold = 0.05;
    /// Recompute bz_max with default_bz_max whenever the reference changes.
    bool auto_bz_max = true;
    /// Stop once the reference reaches this energy (within tolerance).
    std::optional<double> ground_energy;
};

struct RunRecord {
    std::size_t n = 0;
    std::uint64_t instance_seed = 0;
    LocalMinimum initial_reference;
    LocalMinimum final_reference;
    std::vector<CycleResult> cycles;
    std::vector<double> chi_trace;              ///< chi used by each cycle
    std::vector<double> reference_energy_trace; ///< initial, then after each cycle
    std::size_t n_c = 0;
    double cycle_time = 0.0;     ///< tau1 + tau2 + tau3
    double simulated_time = 0.0; ///< n_c * cycle_time
    double wall_clock_s = 0.0;
    std::optional<double> ground_energy;
    bool reached_ground = false;

    double acceptance_fraction() const;
};

RunRecord iterate(const SkInstance& inst, const SpinConfig& start, const CycleConfig& cfg0, int budget,
                  const TunerPolicy& tuner, const IterateOptions& opt = {});

} // namespace iqo
