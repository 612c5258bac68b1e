#include "iqo/quantum.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>

#include "iqo/errors.hpp"
#include "iqo/lanczos.hpp"

namespace iqo {

namespace {

constexpr double kNormTolerance = 1e-9;
constexpr double kMeasureNormTolerance = 1e-6;

double squared_norm(std::span<const Complex> v) {
    double s = 0.0;
    for (const auto& a : v) s += std::norm(a);
    return s;
}

void require_state_size(std::size_t n) {
    if (n > kMaxStateSpins)
        throw ResourceLimit("state vector for n = " + std::to_string(n) + " exceeds the limit of " +
                            std::to_string(kMaxStateSpins) + " spins");
}

void require_dense(std::size_t n) {
    if (n > kMaxDenseSpins)
        throw ResourceLimit("dense diagonalization for n = " + std::to_string(n) + " exceeds the limit of " +
                            std::to_string(kMaxDenseSpins) + " spins; use the low-k solver");
}

// Energies of all 2^n bit-strings. Direct sums are exact to the same rounding
// as energy(); Gray-code updates are used only where direct cost is too high.
std::vector<double> all_energies(const SkInstance& inst) {
    const std::size_t n = inst.n();
    const std::size_t dim = std::size_t{1} << n;
    std::vector<double> e(dim);
    if (n <= 16) {
        for (std::size_t a = 0; a < dim; ++a) e[a] = energy(inst, SpinConfig::from_index(n, a));
        return e;
    }
    SpinConfig c(n);
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = local_field(inst, c, i);
    double cur = energy(inst, c);
    e[0] = cur;
    for (std::size_t g = 1; g < dim; ++g) {
        const auto k = static_cast<std::size_t>(std::countr_zero(g));
        cur += -4.0 * c[k] * h[k];
        const double ds = -2.0 * c[k];
        c.flip(k);
        const auto row = inst.row(k);
        for (std::size_t j = 0; j < n; ++j) h[j] += row[j] * ds;
        e[c.index()] = cur;
    }
    return e;
}

template <typename T>
void apply_impl(const ReferenceHamiltonian& h, const FieldPoint& f, std::span<const T> in, std::span<T> out) {
    const std::size_t dim = h.dim();
    if (in.size() != dim || out.size() != dim) throw InvalidArgument("apply_h: vector length must be 2^n");
    const std::size_t n = h.n();
    for (std::size_t a = 0; a < dim; ++a) {
        T acc = h.diagonal(a, f.bz) * in[a];
        if (f.bx != 0.0) {
            T flips{};
            for (std::size_t i = 0; i < n; ++i) flips += in[a ^ (std::size_t{1} << i)];
            acc -= f.bx * flips;
        }
        out[a] = acc;
    }
}

FieldPoint lerp(const FieldPoint& a, const FieldPoint& b, double t) {
    return {std::max(0.0, a.bz + (b.bz - a.bz) * t), std::max(0.0, a.bx + (b.bx - a.bx) * t)};
}

// In-place exp(+i theta sum_i X_i).
void rotate_x(std::vector<Complex>& v, std::size_t n, double theta) {
    if (theta == 0.0) return;
    const double c = std::cos(theta);
    const Complex is(0.0, std::sin(theta));
    const std::size_t dim = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t bit = std::size_t{1} << i;
        for (std::size_t a = 0; a < dim; ++a) {
            if (a & bit) continue;
            const Complex x = v[a];
            const Complex y = v[a | bit];
            v[a] = c * x + is * y;
            v[a | bit] = c * y + is * x;
        }
    }
}

// In-place exp(-i (E - bz * overlap) tau), with exp(-i E tau) supplied.
void apply_diagonal(std::vector<Complex>& v, const ReferenceHamiltonian& h, std::span<const Complex> sk_phase,
                    double bz, double tau) {
    const auto n = static_cast<int>(h.n());
    std::vector<Complex> zeeman(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) zeeman[k] = std::polar(1.0, bz * (2 * k - n) * tau);
    const auto overlap = h.zeeman_overlap();
    for (std::size_t a = 0; a < v.size(); ++a) v[a] *= sk_phase[a] * zeeman[(overlap[a] + n) / 2];
}

} // namespace

FieldPoint::FieldPoint(double bz_, double bx_) : bz(bz_), bx(bx_) {
    if (!std::isfinite(bz) || !std::isfinite(bx) || bz < 0.0 || bx < 0.0)
        throw InvalidArgument("field components must be finite and non-negative");
}

QuantumState::QuantumState(std::size_t n, std::vector<Complex> amplitudes) : n_(n), amps_(std::move(amplitudes)) {
    require_state_size(n);
    if (amps_.size() != (std::size_t{1} << n)) throw InvalidState("amplitude vector length must be 2^n");
    const double norm = std::sqrt(squared_norm(amps_));
    if (!(std::abs(norm - 1.0) <= kNormTolerance))
        throw InvalidState("state is not normalized (norm = " + std::to_string(norm) + ")");
}

QuantumState QuantumState::basis(std::size_t n, std::uint64_t index) {
    require_state_size(n);
    std::vector<Complex> a(std::size_t{1} << n, Complex{});
    if (index >= a.size()) throw InvalidArgument("basis index out of range");
    a[index] = 1.0;
    return QuantumState(n, std::move(a));
}

QuantumState QuantumState::uniform(std::size_t n) {
    require_state_size(n);
    const std::size_t dim = std::size_t{1} << n;
    return QuantumState(n, std::vector<Complex>(dim, Complex(1.0 / std::sqrt(static_cast<double>(dim)), 0.0)));
}

double QuantumState::norm() const { return std::sqrt(squared_norm(amps_)); }

ReferenceHamiltonian::ReferenceHamiltonian(const SkInstance& inst, const SpinConfig& ref) : n_(inst.n()), ref_(ref) {
    if (ref.size() != inst.n()) throw InvalidArgument("reference length does not match instance size");
    require_state_size(n_);
    sk_energy_ = all_energies(inst);
    overlap_.resize(sk_energy_.size());
    const auto r = static_cast<std::uint64_t>(ref.index());
    for (std::size_t a = 0; a < overlap_.size(); ++a)
        overlap_[a] = static_cast<int>(n_) - 2 * std::popcount(static_cast<std::uint64_t>(a) ^ r);
}

void ReferenceHamiltonian::apply(const FieldPoint& f, std::span<const Complex> in, std::span<Complex> out) const {
    apply_impl<Complex>(*this, f, in, out);
}

void ReferenceHamiltonian::apply(const FieldPoint& f, std::span<const double> in, std::span<double> out) const {
    apply_impl<double>(*this, f, in, out);
}

Eigen::MatrixXd ReferenceHamiltonian::dense(const FieldPoint& f) const {
    require_dense(n_);
    const auto dim = static_cast<Eigen::Index>(this->dim());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index a = 0; a < dim; ++a) {
        m(a, a) = diagonal(static_cast<std::size_t>(a), f.bz);
        for (std::size_t i = 0; i < n_; ++i) m(a, a ^ (Eigen::Index{1} << i)) = -f.bx;
    }
    return m;
}

std::vector<Complex> apply_h(const SkInstance& inst, const SpinConfig& ref, const FieldPoint& f,
                             std::span<const Complex> v) {
    const ReferenceHamiltonian h(inst, ref);
    std::vector<Complex> out(h.dim());
    h.apply(f, v, out);
    return out;
}

SpectrumSlice full_spectrum(const ReferenceHamiltonian& h, const FieldPoint& f, const SpectrumOptions& opt) {
    SpectrumSlice slice;
    slice.field = f;
    if (opt.mode == SpectrumMode::Dense) {
        require_dense(h.n());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
            h.dense(f), opt.want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
        const auto& ev = solver.eigenvalues();
        slice.eigenvalues.assign(ev.data(), ev.data() + ev.size());
        if (opt.want_vectors) slice.eigenvectors = solver.eigenvectors();
        return slice;
    }
    const std::size_t k = std::min(opt.k, h.dim());
    LanczosOptions lo;
    lo.seed = opt.seed;
    lo.want_vectors = opt.want_vectors;
    lo.max_iterations = std::min<std::size_t>(h.dim(), std::max<std::size_t>(300, 20 * k));
    auto op = [&](std::span<const double> x, std::span<double> y) { h.apply(f, x, y); };
    auto res = lanczos_lowest(op, h.dim(), k, lo);
    slice.eigenvalues.assign(res.values.data(), res.values.data() + res.values.size());
    if (opt.want_vectors) slice.eigenvectors = std::move(res.vectors);
    return slice;
}

SpectrumSlice full_spectrum(const SkInstance& inst, const SpinConfig& ref, const FieldPoint& f,
                            const SpectrumOptions& opt) {
    if (opt.mode == SpectrumMode::Dense) require_dense(inst.n());
    return full_spectrum(ReferenceHamiltonian(inst, ref), f, opt);
}

EvolveResult evolve(const ReferenceHamiltonian& h, std::span<const ScheduleSegment> schedule,
                    const QuantumState& v0, double dt_max) {
    if (!(dt_max > 0.0) || !std::isfinite(dt_max)) throw InvalidArgument("evolve: dt_max must be positive");
    if (v0.n() != h.n()) throw InvalidArgument("evolve: state size does not match the Hamiltonian");
    if (std::abs(v0.norm() - 1.0) > kNormTolerance) throw InvalidState("evolve: initial state is not normalized");
    for (const auto& seg : schedule)
        if (!(seg.duration > 0.0) || !std::isfinite(seg.duration))
            throw InvalidArgument("evolve: segment durations must be positive");

    std::vector<Complex> v(v0.amplitudes().begin(), v0.amplitudes().end());
    const auto energies = h.sk_energies();
    std::vector<Complex> half_phase(v.size());
    std::vector<Complex> full_phase(v.size());
    std::size_t total_steps = 0;

    for (const auto& seg : schedule) {
        const auto steps = static_cast<std::size_t>(std::ceil(seg.duration / dt_max - 1e-12));
        const std::size_t nsteps = std::max<std::size_t>(1, steps);
        const double dt = seg.duration / static_cast<double>(nsteps);
        for (std::size_t a = 0; a < v.size(); ++a) {
            half_phase[a] = std::polar(1.0, -energies[a] * dt / 2);
            full_phase[a] = std::polar(1.0, -energies[a] * dt);
        }
        auto field_at = [&](std::size_t k) { return lerp(seg.from, seg.to, (k + 0.5) / nsteps); };

        FieldPoint cur = field_at(0);
        apply_diagonal(v, h, half_phase, cur.bz, dt / 2);
        for (std::size_t k = 0; k < nsteps; ++k) {
            rotate_x(v, h.n(), cur.bx * dt);
            if (k + 1 < nsteps) {
                const FieldPoint next = field_at(k + 1);
                apply_diagonal(v, h, full_phase, 0.5 * (cur.bz + next.bz), dt);
                cur = next;
            } else {
                apply_diagonal(v, h, half_phase, cur.bz, dt / 2);
            }
        }
        total_steps += nsteps;
    }

    const double norm = std::sqrt(squared_norm(v));
    for (auto& a : v) a /= norm;
    return {QuantumState(h.n(), std::move(v)), std::abs(norm - 1.0), total_steps};
}

EvolveResult evolve(const SkInstance& inst, const SpinConfig& ref, std::span<const ScheduleSegment> schedule,
                    const QuantumState& v0, double dt_max) {
    return evolve(ReferenceHamiltonian(inst, ref), schedule, v0, dt_max);
}

SpinConfig measure(const QuantumState& v, std::uint64_t seed) {
    const double norm2 = squared_norm(v.amplitudes());
    if (std::abs(std::sqrt(norm2) - 1.0) > kMeasureNormTolerance)
        throw InvalidState("measure: state is not normalized");
    Rng rng(seed);
    const double u = rng.uniform01() * norm2;
    double acc = 0.0;
    std::size_t last_nonzero = 0;
    for (std::size_t a = 0; a < v.dim(); ++a) {
        const double p = v.probability(a);
        if (p > 0.0) last_nonzero = a;
        acc += p;
        if (u < acc) return SpinConfig::from_index(v.n(), a);
    }
    return SpinConfig::from_index(v.n(), last_nonzero);
}

std::vector<std::uint64_t> sample_counts(const QuantumState& v, std::size_t shots, std::uint64_t seed) {
    const double norm2 = squared_norm(v.amplitudes());
    if (std::abs(std::sqrt(norm2) - 1.0) > kMeasureNormTolerance)
        throw InvalidState("sample_counts: state is not normalized");
    std::vector<double> cumulative(v.dim());
    double acc = 0.0;
    for (std::size_t a = 0; a < v.dim(); ++a) cumulative[a] = (acc += v.probability(a));
    std::vector<std::uint64_t> counts(v.dim(), 0);
    Rng rng(seed);
    for (std::size_t s = 0; s < shots; ++s) {
        const double u = rng.uniform01() * acc;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        if (it == cumulative.end()) --it;
        ++counts[static_cast<std::size_t>(it - cumulative.begin())];
    }
    return counts;
}

double lowest_gap(const ReferenceHamiltonian& h, const FieldPoint& f, bool dense) {
    SpectrumOptions opt;
    opt.k = 2;
    opt.mode = dense ? SpectrumMode::Dense : SpectrumMode::LowK;
    const auto slice = full_spectrum(h, f, opt);
    return slice.eigenvalues[1] - slice.eigenvalues[0];
}

GapResult min_gap_along_ray(const ReferenceHamiltonian& h, double chi, std::span<const double> bz_grid,
                            const GapOptions& opt) {
    if (!(chi > 0.0) || !std::isfinite(chi)) throw InvalidArgument("min_gap_along_ray: chi must be positive");
    if (bz_grid.empty()) throw InvalidArgument("min_gap_along_ray: empty B_z grid");
    for (std::size_t i = 1; i < bz_grid.size(); ++i)
        if (bz_grid[i] > bz_grid[i - 1]) throw InvalidArgument("min_gap_along_ray: B_z grid must be descending");

    std::vector<double> gaps(bz_grid.size());
    for (std::size_t i = 0; i < bz_grid.size(); ++i)
        gaps[i] = lowest_gap(h, FieldPoint::on_ray(chi, bz_grid[i]), opt.dense);
    const auto best = static_cast<std::size_t>(std::min_element(gaps.begin(), gaps.end()) - gaps.begin());
    GapResult result{gaps[best], FieldPoint::on_ray(chi, bz_grid[best])};
    if (!opt.refine || bz_grid.size() < 2) return result;

    // Golden-section search on [lower neighbour, upper neighbour].
    double lo = bz_grid[std::min(best + 1, bz_grid.size() - 1)];
    double hi = bz_grid[best == 0 ? 0 : best - 1];
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    auto gap_at = [&](double bz) { return lowest_gap(h, FieldPoint::on_ray(chi, bz), opt.dense); };
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double g1 = gap_at(x1);
    double g2 = gap_at(x2);
    for (int it = 0; it < 60 && hi - lo > 1e-10 * std::max(1.0, hi); ++it) {
        if (g1 < g2) {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - inv_phi * (hi - lo);
            g1 = gap_at(x1);
        } else {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + inv_phi * (hi - lo);
            g2 = gap_at(x2);
        }
    }
    const double bz = g1 < g2 ? x1 : x2;
    const double g = std::min(g1, g2);
    if (g < result.gap) result = {g, FieldPoint::on_ray(chi, bz)};
    return result;
}

GapResult min_gap_along_ray(const SkInstance& inst, const SpinConfig& ref, double chi,
                            std::span<const double> bz_grid, const GapOptions& opt) {
    return min_gap_along_ray(ReferenceHamiltonian(inst, ref), chi, bz_grid, opt);
}

double classical_critical_field(const ReferenceHamiltonian& h) {
    const auto r = h.reference().index();
    const double e_ref = h.sk_energies()[r];
    const auto n = static_cast<int>(h.n());
    double bz_c = 0.0;
    for (std::size_t a = 0; a < h.dim(); ++a) {
        const double e = h.sk_energies()[a];
        const int ov = h.zeeman_overlap()[a];
        if (e < e_ref && ov < n) bz_c = std::max(bz_c, (e_ref - e) / (n - ov));
    }
    return bz_c;
}

BasinIsolator::BasinIsolator(const SkInstance& inst, const SpinConfig& ref, std::vector<LocalMinimum> minima)
    : h_(inst, ref), minima_(std::move(minima)) {
    require_dense(inst.n());
    owner_ = basin_partition(inst, minima_);
    members_.resize(minima_.size());
    for (std::size_t a = 0; a < owner_.size(); ++a) members_[owner_[a]].push_back(a);
}

std::vector<BasinLevel> BasinIsolator::levels(const FieldPoint& f) const {
    std::vector<BasinLevel> out;
    out.reserve(minima_.size());
    for (std::size_t id = 0; id < minima_.size(); ++id) {
        const auto& members = members_[id];
        const std::uint64_t home = minima_[id].config.index();
        const auto size = static_cast<Eigen::Index>(members.size());
        // members are ascending basis indices
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size, size);
        Eigen::Index home_pos = 0;
        for (Eigen::Index p = 0; p < size; ++p) {
            const auto a = members[static_cast<std::size_t>(p)];
            if (a == home) home_pos = p;
            m(p, p) = h_.diagonal(a, f.bz);
            if (f.bx == 0.0) continue;
            for (std::size_t i = 0; i < h_.n(); ++i) {
                const auto b = a ^ (std::uint64_t{1} << i);
                const auto it = std::lower_bound(members.begin(), members.end(), b);
                if (it != members.end() && *it == b) m(p, it - members.begin()) = -f.bx;
            }
        }
        double level = m(home_pos, home_pos);
        if (f.bx != 0.0) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
            Eigen::Index best = 0;
            solver.eigenvectors().row(home_pos).cwiseAbs().maxCoeff(&best);
            level = solver.eigenvalues()[best];
        }
        out.push_back({id, level, members.size()});
    }
    return out;
}

std::vector<BasinLevel> isolate_basins(const SkInstance& inst, const SpinConfig& ref, const FieldPoint& f,
                                       const std::vector<LocalMinimum>& minima) {
    return BasinIsolator(inst, ref, minima).levels(f);
}

double empirical_repulsion(double level, double sk_energy, std::size_t n, double bx, double j_scale) {
    const double shift = level - sk_energy;
    if (!(shift < 0.0)) throw InvalidArgument("empirical_repulsion: level is not shifted down");
    return -static_cast<double>(n) * bx * bx / (2.0 * j_scale * shift);
}

namespace {

template <typename T>
void write_le(std::ostream& os, T value) {
    auto bits = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
    if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
    os.write(reinterpret_cast<const char*>(bits.data()), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
    std::array<unsigned char, sizeof(T)> bits{};
    if (!is.read(reinterpret_cast<char*>(bits.data()), sizeof(T))) throw IoError("state snapshot is truncated");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
    return std::bit_cast<T>(bits);
}

} // namespace

void save_state(const std::string& path, const QuantumState& v) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path + " for writing");
    write_le<std::uint64_t>(os, v.n());
    for (const auto& a : v.amplitudes()) {
        write_le<double>(os, a.real());
        write_le<double>(os, a.imag());
    }
    if (!os) throw IoError("failed writing " + path);
}

QuantumState load_state(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    const auto n = read_le<std::uint64_t>(is);
    require_state_size(n);
    std::vector<Complex> amps(std::size_t{1} << n);
    for (auto& a : amps) {
        const double re = read_le<double>(is);
        const double im = read_le<double>(is);
        a = {re, im};
    }
    if (is.peek() != std::char_traits<char>::eof()) throw IoError("state snapshot has trailing bytes");
    return QuantumState(n, std::move(amps));
}

} // namespace iqo
