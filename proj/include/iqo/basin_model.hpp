#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "iqo/rng.hpp"

namespace iqo {

/// Isolated-minimum level: SK energy, Zeeman slope m = 1 - 2d/N, and the
/// level-repulsion parameter f.
struct BasinCurve {
    double e_l = 0.0;
    double m_l = 1.0;
    double f_l = 0.5;
};

/// Sigma(B_z, B_x) = N J [f - sqrt((f + m B_z / J)^2 + (B_x / J)^2)].
double self_energy(const BasinCurve& c, std::size_t n, double j, double bz, double bx);

/// E_l + Sigma_l.
inline double tilde_energy(const BasinCurve& c, std::size_t n, double j, double bz, double bx) {
    return c.e_l + self_energy(c, n, j, bz, bx);
}

/// Draws an SK energy E_l (not per spin) for an n-spin system with scale j.
struct EnergySampler {
    std::function<double(Rng&, std::size_t n, double j)> draw;
    std::string description;
};

/// Per-spin energies eps ~ N(mean, stddev^2), E = eps * n * j.
EnergySampler gaussian_energy_sampler(double mean_eps, double stddev_eps);

/// Gaussian fit to local-minimum energy densities from exhaustive enumeration.
struct EnergyDensityFit {
    std::size_t n = 0;
    std::size_t instances = 0;
    std::size_t minima = 0;
    double mean_eps = 0.0;
    double stddev_eps = 0.0;
    double mean_ground_eps = 0.0; ///< average per-spin ground-state energy
};

/// Enumerates the minima of `instances` random instances of size n (n <= 20).
EnergyDensityFit calibrate_energy_density(std::size_t n, std::size_t instances, std::uint64_t seed);

/// Frozen output of calibrate_energy_density(14, 40, 2024) with j = 1.
inline constexpr double kDefaultMinimaMeanEps = -0.99855;
inline constexpr double kDefaultMinimaStddevEps = 0.22359;

/// Default E_l sampler: the calibrated Gaussian above.
EnergySampler default_energy_sampler();

/// Large-N ground-state energy density under the ordered-pair energy
/// convention (twice the Parisi value 0.7631667).
inline constexpr double kSkGroundStateEps = -1.5263334;

struct BasinEnsemble {
    std::size_t n = 0;
    double j_scale = 1.0;
    BasinCurve reference; ///< m = 1 exactly; e_l is a conditioning parameter
    std::vector<BasinCurve> curves;
    std::uint64_t seed = 0;
};

/// Each curve: d ~ Binomial(n, 1/2), m = 1 - 2d/n, f ~ U(1/4, 3/4), E_l from
/// `sampler`, all independent. The reference takes E_r = reference_eps * n * j
/// and its own f ~ U(1/4, 3/4).
BasinEnsemble sample_ensemble(std::size_t n, std::size_t n_curves, const EnergySampler& sampler,
                              std::uint64_t seed, double reference_eps, double j_scale = 1.0);

struct CrossingCounts {
    std::size_t n_above = 0; ///< crossings by curves with E_l > E_r
    std::size_t n_below = 0; ///< crossings by curves with E_l < E_r
    std::vector<double> above_fields;
    std::vector<double> below_fields;
};

inline constexpr std::size_t kDefaultCrossingGrid = 2048;

/// Intersections of every curve with the reference along B_x = chi B_z for
/// B_z in (0, bz_hi]: sign changes of E~_l - E~_r on a uniform grid, refined
/// by bisection to |dE| < 1e-10 N J. Tangencies are not counted.
CrossingCounts count_crossings(const BasinEnsemble& ens, double chi, double bz_hi,
                               std::size_t grid = kDefaultCrossingGrid);

/// B_z^c(chi): the last (largest-B_z) intersection with the reference; 0 if none.
double critical_field(const BasinEnsemble& ens, double chi, double bz_hi, std::size_t grid = kDefaultCrossingGrid);

struct PhasePoint {
    double chi = 0.0;
    double bz = 0.0;
    double bx = 0.0;
};

/// First-order line (B_z^c(chi), chi B_z^c(chi)), in input order.
std::vector<PhasePoint> phase_boundary(const BasinEnsemble& ens, std::span<const double> chis, double bz_hi,
                                       std::size_t grid = kDefaultCrossingGrid);

/// Builds the ensemble for one replica seed at one reference energy density.
using EnsembleFactory = std::function<BasinEnsemble(std::uint64_t replica_seed, double reference_eps)>;

struct SweepOptions {
    double bz_hi = 40.0;
    std::size_t grid = kDefaultCrossingGrid;
    std::size_t bootstrap = 200;
    std::size_t jobs = 1;
    std::uint64_t seed = 1;
};

struct SweepRow {
    double chi = 0.0;
    double eps_r = 0.0;
    std::size_t n_above = 0; ///< summed over replicas
    std::size_t n_below = 0;
    double ratio = 0.0;  ///< mean N_> / mean N_<; NaN when undefined
    double std_error = 0.0; ///< bootstrap over replicas
    bool defined = false;
    std::uint64_t seed = 0;
};

/// Disorder-averaged N_>/N_< for every (eps_r, chi), eps_r outer. Replica r
/// uses derive_seed(seed, r) for every cell, so cells share disorder.
std::vector<SweepRow> ratio_sweep(const EnsembleFactory& factory, std::span<const double> chis,
                                  std::span<const double> reference_eps, std::size_t reps, const SweepOptions& opt);

struct FitOptions {
    double eps_gs = kSkGroundStateEps;
    /// chi_c search interval; NaN bounds mean "derive from the data".
    double chi_c_lo = std::numeric_limits<double>::quiet_NaN();
    double chi_c_hi = std::numeric_limits<double>::quiet_NaN();
    std::size_t scan_points = 400;
};

struct FitResult {
    double gamma = 0.0;
    double delta = 0.0;
    double chi_c = 0.0;
    double log_prefactor = 0.0;
    double eps_gs = 0.0;
    std::vector<double> residuals; ///< log-ratio residuals of the rows used
    double rms = 0.0;
    std::size_t rows_used = 0;
    double window_chi_lo = 0.0; ///< smallest chi - chi_c used
    double window_chi_hi = 0.0;
    double window_eps_lo = 0.0; ///< smallest eps_r - eps_gs used
    double window_eps_hi = 0.0;
};

/// Least squares for log ratio = gamma log(chi - chi_c) - delta log(eps_r - eps_gs) + c,
/// linear inside, chi_c by scan + golden section. Rows that are undefined or
/// have ratio <= 0 are skipped. Throws FitWindowError when fewer than two
/// distinct chi or eps_r remain, or chi - chi_c spans less than one decade.
FitResult fit_exponents(std::span<const SweepRow> table, const FitOptions& opt = {});

/// Rows exactly following ratio = (chi - chi_c)^gamma / (eps_r - eps_gs)^delta,
/// each multiplied by exp(noise * z), z ~ N(0, 1).
std::vector<SweepRow> synthetic_table(double gamma, double delta, double chi_c, double eps_gs,
                                      std::span<const double> chis, std::span<const double> reference_eps,
                                      double noise = 0.0, std::uint64_t seed = 1);

} // namespace iqo
