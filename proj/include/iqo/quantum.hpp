#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "iqo/classical.hpp"
#include "iqo/sk.hpp"

namespace iqo {

using Complex = std::complex<double>;

/// Memory guard for 2^n amplitude vectors.
inline constexpr std::size_t kMaxStateSpins = 26;
/// Largest n for dense (2^n x 2^n) diagonalization.
inline constexpr std::size_t kMaxDenseSpins = 12;

/// (B_z, B_x) in units of J. Both finite and non-negative.
struct FieldPoint {
    double bz = 0.0;
    double bx = 0.0;

    FieldPoint() = default;
    FieldPoint(double bz_, double bx_);

    /// Point on the ray B_x = chi * B_z.
    static FieldPoint on_ray(double chi, double bz) { return {bz, chi * bz}; }
    friend bool operator==(const FieldPoint&, const FieldPoint&) = default;
};

/// Normalized amplitudes over the 2^n bit-strings; index bit i is spin i
/// (bit 0 <-> s = +1), matching SpinConfig::index().
class QuantumState {
public:
    QuantumState() = default;
    /// Throws InvalidState unless the vector has length 2^n and unit norm (1e-9).
    QuantumState(std::size_t n, std::vector<Complex> amplitudes);

    static QuantumState basis(std::size_t n, std::uint64_t index);
    static QuantumState basis(const SpinConfig& c) { return basis(c.size(), c.index()); }
    static QuantumState uniform(std::size_t n);

    std::size_t n() const noexcept { return n_; }
    std::size_t dim() const noexcept { return amps_.size(); }
    std::span<const Complex> amplitudes() const noexcept { return amps_; }
    const Complex& operator[](std::size_t i) const noexcept { return amps_[i]; }
    double norm() const;
    double probability(std::size_t i) const { return std::norm(amps_[i]); }

private:
    std::size_t n_ = 0;
    std::vector<Complex> amps_;
};

/// H = H_SK + B_z H_ref + B_x H_q restricted to a fixed instance and reference:
///   diagonal  E_a - B_z * sum_i s_i^r s_i^a,
///   off-diag  -B_x between bit-strings one flip apart.
/// Diagonals are precomputed once; the action is matrix-free.
class ReferenceHamiltonian {
public:
    ReferenceHamiltonian(const SkInstance& inst, const SpinConfig& ref);

    std::size_t n() const noexcept { return n_; }
    std::size_t dim() const noexcept { return sk_energy_.size(); }
    const SpinConfig& reference() const noexcept { return ref_; }

    /// E_a for every basis index.
    std::span<const double> sk_energies() const noexcept { return sk_energy_; }
    /// sum_i s_i^r s_i^a = n * m_a (integer valued).
    std::span<const int> zeeman_overlap() const noexcept { return overlap_; }
    double diagonal(std::size_t index, double bz) const noexcept {
        return sk_energy_[index] - bz * overlap_[index];
    }

    void apply(const FieldPoint& f, std::span<const Complex> in, std::span<Complex> out) const;
    void apply(const FieldPoint& f, std::span<const double> in, std::span<double> out) const;

    /// Dense matrix; n <= kMaxDenseSpins.
    Eigen::MatrixXd dense(const FieldPoint& f) const;

private:
    std::size_t n_;
    SpinConfig ref_;
    std::vector<double> sk_energy_;
    std::vector<int> overlap_;
};

/// H v for a single state (convenience wrapper around ReferenceHamiltonian).
std::vector<Complex> apply_h(const SkInstance& inst, const SpinConfig& ref, const FieldPoint& f,
                             std::span<const Complex> v);

enum class SpectrumMode { Dense, LowK };

struct SpectrumOptions {
    SpectrumMode mode = SpectrumMode::Dense;
    std::size_t k = 8; ///< levels kept in LowK mode
    bool want_vectors = false;
    std::uint64_t seed = 12345; ///< Lanczos start vector
};

struct SpectrumSlice {
    FieldPoint field;
    std::vector<double> eigenvalues; ///< ascending
    std::optional<Eigen::MatrixXd> eigenvectors; ///< columns match eigenvalues
};

SpectrumSlice full_spectrum(const ReferenceHamiltonian& h, const FieldPoint& f, const SpectrumOptions& opt = {});
SpectrumSlice full_spectrum(const SkInstance& inst, const SpinConfig& ref, const FieldPoint& f,
                            const SpectrumOptions& opt = {});

/// Piecewise-linear field schedule segment.
struct ScheduleSegment {
    FieldPoint from;
    FieldPoint to;
    double duration = 0.0;
};

struct EvolveResult {
    QuantumState state;
    double norm_drift = 0.0; ///< |norm - 1| before the final renormalization
    std::size_t steps = 0;
};

/// Solves i dv/dt = H(t) v with fields linear in time inside each segment.
///
/// Integrator: symmetric (Strang) split step with the field sampled at each
/// step midpoint,
///   U(dt) = exp(-i D dt/2) exp(+i B_x dt sum_i X_i) exp(-i D dt/2),
/// where D is the diagonal part. The X factor is a product of exact
/// single-qubit rotations, so every factor is unitary and the scheme is
/// second order in dt. Adjacent diagonal half steps are fused.
EvolveResult evolve(const ReferenceHamiltonian& h, std::span<const ScheduleSegment> schedule,
                    const QuantumState& v0, double dt_max);
EvolveResult evolve(const SkInstance& inst, const SpinConfig& ref, std::span<const ScheduleSegment> schedule,
                    const QuantumState& v0, double dt_max);

/// Born-rule sample of one bit-string. Throws InvalidState if |norm - 1| > 1e-6.
SpinConfig measure(const QuantumState& v, std::uint64_t seed);

/// Histogram of `shots` Born samples drawn from one stream.
std::vector<std::uint64_t> sample_counts(const QuantumState& v, std::size_t shots, std::uint64_t seed);

struct GapOptions {
    /// Dense diagonalization per grid point; otherwise Lanczos (k = 2).
    bool dense = false;
    /// Golden-section refinement between the neighbours of the best grid node.
    bool refine = false;
};

struct GapResult {
    double gap = 0.0;
    FieldPoint at;
};

/// E_1 - E_0 at a single field point.
double lowest_gap(const ReferenceHamiltonian& h, const FieldPoint& f, bool dense = false);

/// Minimum of E_1 - E_0 along B_x = chi * B_z over a descending B_z grid.
GapResult min_gap_along_ray(const ReferenceHamiltonian& h, double chi, std::span<const double> bz_grid,
                            const GapOptions& opt = {});
GapResult min_gap_along_ray(const SkInstance& inst, const SpinConfig& ref, double chi,
                            std::span<const double> bz_grid, const GapOptions& opt = {});

/// B_z at which the reference becomes the unique classical (B_x = 0) ground
/// state: max over lower-energy bit-strings a of (E_r - E_a) / (n - n m_a).
double classical_critical_field(const ReferenceHamiltonian& h);

struct BasinLevel {
    std::size_t minimum_id = 0; ///< position in the minima list
    double tilde_energy = 0.0;  ///< lowest eigenvalue of H restricted to the basin
    std::size_t basin_size = 0;
};

/// Spectra of isolated local minima: H restricted to each steepest-descent
/// basin (couplings leaving the basin dropped). The level reported for a
/// basin is the restricted eigenstate with the largest weight on the minimum
/// bit-string itself; this is the lowest restricted level except where a
/// higher-overlap basin member overtakes the minimum at large B_z.
class BasinIsolator {
public:
    /// `minima` must list every single-flip-stable configuration. n <= kMaxDenseSpins.
    BasinIsolator(const SkInstance& inst, const SpinConfig& ref, std::vector<LocalMinimum> minima);

    const ReferenceHamiltonian& hamiltonian() const noexcept { return h_; }
    const std::vector<LocalMinimum>& minima() const noexcept { return minima_; }
    std::span<const std::size_t> owner() const noexcept { return owner_; }

    std::vector<BasinLevel> levels(const FieldPoint& f) const;

private:
    ReferenceHamiltonian h_;
    std::vector<LocalMinimum> minima_;
    std::vector<std::size_t> owner_;
    std::vector<std::vector<std::uint64_t>> members_;
};

std::vector<BasinLevel> isolate_basins(const SkInstance& inst, const SpinConfig& ref, const FieldPoint& f,
                                       const std::vector<LocalMinimum>& minima);

/// f_l implied by a basin level at B_z = 0: level = E_l - n B_x^2 / (2 f J).
double empirical_repulsion(double level, double sk_energy, std::size_t n, double bx, double j_scale);

/// Snapshot: 8-byte little-endian n, then 2^n (re, im) little-endian doubles.
void save_state(const std::string& path, const QuantumState& v);
QuantumState load_state(const std::string& path);

} // namespace iqo
