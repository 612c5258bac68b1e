#include "iqo/basin_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <exception>
#include <set>
#include <thread>

#include <Eigen/Dense>

#include "iqo/classical.hpp"
#include "iqo/errors.hpp"
#include "iqo/sk.hpp"

namespace iqo {

double self_energy(const BasinCurve& c, std::size_t n, double j, double bz, double bx) {
    const double a = c.f_l + c.m_l * bz / j;
    const double b = bx / j;
    return static_cast<double>(n) * j * (c.f_l - std::hypot(a, b));
}

EnergySampler gaussian_energy_sampler(double mean_eps, double stddev_eps) {
    if (!std::isfinite(mean_eps) || !(stddev_eps >= 0.0) || !std::isfinite(stddev_eps))
        throw InvalidArgument("gaussian_energy_sampler: invalid parameters");
    return {[=](Rng& rng, std::size_t n, double j) { return rng.normal(mean_eps, stddev_eps) * static_cast<double>(n) * j; },
            "gaussian(mean_eps=" + std::to_string(mean_eps) + ", stddev_eps=" + std::to_string(stddev_eps) + ")"};
}

EnergySampler default_energy_sampler() {
    return gaussian_energy_sampler(kDefaultMinimaMeanEps, kDefaultMinimaStddevEps);
}

EnergyDensityFit calibrate_energy_density(std::size_t n, std::size_t instances, std::uint64_t seed) {
    if (instances == 0) throw InvalidArgument("calibrate_energy_density: need at least one instance");
    EnergyDensityFit fit;
    fit.n = n;
    fit.instances = instances;
    double sum = 0.0;
    double sum2 = 0.0;
    double ground = 0.0;
    for (std::size_t k = 0; k < instances; ++k) {
        const auto inst = generate_instance(n, 1.0, derive_seed(seed, k));
        const auto minima = enumerate_minima(inst);
        for (const auto& m : minima) {
            sum += m.per_spin_energy;
            sum2 += m.per_spin_energy * m.per_spin_energy;
        }
        fit.minima += minima.size();
        ground += minima.front().per_spin_energy;
    }
    const auto count = static_cast<double>(fit.minima);
    fit.mean_eps = sum / count;
    fit.stddev_eps = std::sqrt(std::max(0.0, (sum2 - count * fit.mean_eps * fit.mean_eps) / std::max(1.0, count - 1)));
    fit.mean_ground_eps = ground / static_cast<double>(instances);
    return fit;
}

BasinEnsemble sample_ensemble(std::size_t n, std::size_t n_curves, const EnergySampler& sampler,
                              std::uint64_t seed, double reference_eps, double j_scale) {
    if (n < 1) throw InvalidArgument("sample_ensemble: n must be >= 1");
    if (n_curves < 1) throw InvalidArgument("sample_ensemble: need at least one curve");
    if (!(j_scale > 0.0)) throw InvalidArgument("sample_ensemble: j_scale must be positive");
    if (!std::isfinite(reference_eps)) throw InvalidArgument("sample_ensemble: reference energy must be finite");
    if (!sampler.draw) throw InvalidArgument("sample_ensemble: empty energy sampler");

    BasinEnsemble ens;
    ens.n = n;
    ens.j_scale = j_scale;
    ens.seed = seed;
    Rng rng(seed);
    ens.reference = {reference_eps * static_cast<double>(n) * j_scale, 1.0, rng.uniform(0.25, 0.75)};
    ens.curves.reserve(n_curves);
    for (std::size_t k = 0; k < n_curves; ++k) {
        BasinCurve c;
        const int d = rng.binomial_half(static_cast<int>(n));
        c.m_l = 1.0 - 2.0 * d / static_cast<double>(n);
        c.f_l = rng.uniform(0.25, 0.75);
        c.e_l = sampler.draw(rng, n, j_scale);
        ens.curves.push_back(c);
    }
    return ens;
}

CrossingCounts count_crossings(const BasinEnsemble& ens, double chi, double bz_hi, std::size_t grid) {
    if (!(chi >= 0.0) || !std::isfinite(chi)) throw InvalidArgument("count_crossings: chi must be >= 0");
    if (!(bz_hi > 0.0) || !std::isfinite(bz_hi)) throw InvalidArgument("count_crossings: bz_hi must be positive");
    if (grid < 2) throw InvalidArgument("count_crossings: grid must have at least 2 points");

    const std::size_t n = ens.n;
    const double j = ens.j_scale;
    const double tol = 1e-10 * static_cast<double>(n) * j;
    std::vector<double> nodes(grid);
    std::vector<double> ref_level(grid);
    for (std::size_t k = 0; k < grid; ++k) {
        nodes[k] = bz_hi * static_cast<double>(k) / static_cast<double>(grid - 1);
        ref_level[k] = tilde_energy(ens.reference, n, j, nodes[k], chi * nodes[k]);
    }

    CrossingCounts out;
    for (const auto& c : ens.curves) {
        if (c.e_l == ens.reference.e_l) continue; // neither above nor below
        const bool above = c.e_l > ens.reference.e_l;
        auto diff = [&](double bz) {
            return tilde_energy(c, n, j, bz, chi * bz) - tilde_energy(ens.reference, n, j, bz, chi * bz);
        };
        // Walk nodes, bracketing between consecutive non-zero values.
        double prev_bz = 0.0;
        double prev_g = tilde_energy(c, n, j, 0.0, 0.0) - ref_level[0];
        for (std::size_t k = 1; k < grid; ++k) {
            const double g = tilde_energy(c, n, j, nodes[k], chi * nodes[k]) - ref_level[k];
            if (g == 0.0) continue;
            if (prev_g != 0.0 && (g > 0.0) != (prev_g > 0.0)) {
                double lo = prev_bz;
                double hi = nodes[k];
                double glo = prev_g;
                double mid = 0.5 * (lo + hi);
                for (int it = 0; it < 200; ++it) {
                    mid = 0.5 * (lo + hi);
                    const double gm = diff(mid);
                    if (std::abs(gm) < tol || hi - lo <= 1e-15 * std::max(1.0, hi)) break;
                    if ((gm > 0.0) == (glo > 0.0)) {
                        lo = mid;
                        glo = gm;
                    } else {
                        hi = mid;
                    }
                }
                (above ? out.above_fields : out.below_fields).push_back(mid);
            }
            prev_bz = nodes[k];
            prev_g = g;
        }
    }
    out.n_above = out.above_fields.size();
    out.n_below = out.below_fields.size();
    return out;
}

double critical_field(const BasinEnsemble& ens, double chi, double bz_hi, std::size_t grid) {
    const auto counts = count_crossings(ens, chi, bz_hi, grid);
    double last = 0.0;
    for (double b : counts.above_fields) last = std::max(last, b);
    for (double b : counts.below_fields) last = std::max(last, b);
    return last;
}

std::vector<PhasePoint> phase_boundary(const BasinEnsemble& ens, std::span<const double> chis, double bz_hi,
                                       std::size_t grid) {
    if (chis.empty()) throw InvalidArgument("phase_boundary: empty chi list");
    std::vector<PhasePoint> out;
    out.reserve(chis.size());
    for (double chi : chis) {
        const double bz = critical_field(ens, chi, bz_hi, grid);
        out.push_back({chi, bz, chi * bz});
    }
    return out;
}

std::vector<SweepRow> ratio_sweep(const EnsembleFactory& factory, std::span<const double> chis,
                                  std::span<const double> reference_eps, std::size_t reps, const SweepOptions& opt) {
    if (chis.empty() || reference_eps.empty()) throw InvalidArgument("ratio_sweep: empty chi or eps_r grid");
    if (reps < 1) throw InvalidArgument("ratio_sweep: reps must be >= 1");
    if (!factory) throw InvalidArgument("ratio_sweep: missing ensemble factory");

    const std::size_t ne = reference_eps.size();
    const std::size_t nc = chis.size();
    // counts[(e * nc + c) * reps + r] = {above, below}
    std::vector<std::pair<std::size_t, std::size_t>> counts(ne * nc * reps);

    auto work = [&](std::size_t task) {
        const std::size_t e = task / reps;
        const std::size_t r = task % reps;
        const auto ens = factory(derive_seed(opt.seed, r), reference_eps[e]);
        for (std::size_t c = 0; c < nc; ++c) {
            const auto cc = count_crossings(ens, chis[c], opt.bz_hi, opt.grid);
            counts[(e * nc + c) * reps + r] = {cc.n_above, cc.n_below};
        }
    };
    const std::size_t tasks = ne * reps;
    const std::size_t jobs = std::clamp<std::size_t>(opt.jobs, 1, tasks);
    if (jobs == 1) {
        for (std::size_t t = 0; t < tasks; ++t) work(t);
    } else {
        std::vector<std::exception_ptr> errors(jobs);
        {
            std::vector<std::jthread> pool;
            for (std::size_t w = 0; w < jobs; ++w)
                pool.emplace_back([&, w] {
                    try {
                        for (std::size_t t = w; t < tasks; t += jobs) work(t);
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
        }
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    std::vector<SweepRow> rows;
    rows.reserve(ne * nc);
    for (std::size_t e = 0; e < ne; ++e) {
        for (std::size_t c = 0; c < nc; ++c) {
            const auto* cell = &counts[(e * nc + c) * reps];
            SweepRow row;
            row.chi = chis[c];
            row.eps_r = reference_eps[e];
            row.seed = opt.seed;
            for (std::size_t r = 0; r < reps; ++r) {
                row.n_above += cell[r].first;
                row.n_below += cell[r].second;
            }
            row.defined = row.n_below > 0;
            row.ratio = row.defined ? static_cast<double>(row.n_above) / static_cast<double>(row.n_below)
                                    : std::numeric_limits<double>::quiet_NaN();
            if (row.defined && reps > 1 && opt.bootstrap > 1) {
                Rng rng(derive_seed(opt.seed, 0xb007 + e * nc + c));
                std::vector<double> boot;
                boot.reserve(opt.bootstrap);
                for (std::size_t b = 0; b < opt.bootstrap; ++b) {
                    std::size_t up = 0;
                    std::size_t down = 0;
                    for (std::size_t r = 0; r < reps; ++r) {
                        const auto& pick = cell[rng.below(reps)];
                        up += pick.first;
                        down += pick.second;
                    }
                    if (down > 0) boot.push_back(static_cast<double>(up) / static_cast<double>(down));
                }
                if (boot.size() > 1) {
                    const double mean = std::accumulate(boot.begin(), boot.end(), 0.0) / boot.size();
                    double ss = 0.0;
                    for (double x : boot) ss += (x - mean) * (x - mean);
                    row.std_error = std::sqrt(ss / static_cast<double>(boot.size() - 1));
                }
            }
            rows.push_back(row);
        }
    }
    return rows;
}

namespace {

struct LinearFit {
    Eigen::Vector3d params; // gamma, delta, c
    Eigen::VectorXd residuals;
    double sse = std::numeric_limits<double>::infinity();
};

struct FitRow {
    double chi;
    double log_eps;
    double log_ratio;
};

LinearFit linear_fit(const std::vector<FitRow>& rows, double chi_c) {
    const auto m = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd a(m, 3);
    Eigen::VectorXd y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        a(i, 0) = std::log(r.chi - chi_c);
        a(i, 1) = -r.log_eps;
        a(i, 2) = 1.0;
        y(i) = r.log_ratio;
    }
    LinearFit fit;
    fit.params = a.colPivHouseholderQr().solve(y);
    fit.residuals = y - a * fit.params;
    fit.sse = fit.residuals.squaredNorm();
    if (!std::isfinite(fit.sse)) fit.sse = std::numeric_limits<double>::infinity();
    return fit;
}

} // namespace

FitResult fit_exponents(std::span<const SweepRow> table, const FitOptions& opt) {
    std::vector<FitRow> rows;
    std::set<double> chis;
    std::set<double> epss;
    for (const auto& r : table) {
        if (!r.defined || !(r.ratio > 0.0) || !std::isfinite(r.ratio)) continue;
        if (!(r.eps_r > opt.eps_gs)) continue;
        rows.push_back({r.chi, std::log(r.eps_r - opt.eps_gs), std::log(r.ratio)});
        chis.insert(r.chi);
        epss.insert(r.eps_r);
    }
    if (chis.size() < 2) throw FitWindowError("fit_exponents: need at least two distinct chi values with a defined ratio");
    if (epss.size() < 2) throw FitWindowError("fit_exponents: need at least two distinct reference energies");

    const double chi_min = *chis.begin();
    const double chi_max = *chis.rbegin();
    double hi = std::isnan(opt.chi_c_hi) ? chi_min : std::min(opt.chi_c_hi, chi_min);
    hi -= 1e-9 * std::max(1.0, std::abs(chi_min));
    double lo = std::isnan(opt.chi_c_lo) ? std::max(0.0, chi_min - (chi_max - chi_min)) : opt.chi_c_lo;
    if (!(lo < hi)) throw FitWindowError("fit_exponents: empty chi_c search interval");

    // Coarse scan, then golden section inside the best bracket.
    const std::size_t points = std::max<std::size_t>(opt.scan_points, 3);
    std::vector<double> xs(points);
    std::vector<double> sse(points);
    for (std::size_t i = 0; i < points; ++i) {
        xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
        sse[i] = linear_fit(rows, xs[i]).sse;
    }
    const auto best = static_cast<std::size_t>(std::min_element(sse.begin(), sse.end()) - sse.begin());
    double a = xs[best == 0 ? 0 : best - 1];
    double b = xs[std::min(best + 1, points - 1)];
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = linear_fit(rows, x1).sse;
    double f2 = linear_fit(rows, x2).sse;
    for (int it = 0; it < 200 && b - a > 1e-12 * std::max(1.0, std::abs(b)); ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = linear_fit(rows, x1).sse;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = linear_fit(rows, x2).sse;
        }
    }
    double chi_c = f1 < f2 ? x1 : x2;
    if (std::min(f1, f2) > sse[best]) chi_c = xs[best];

    const auto fit = linear_fit(rows, chi_c);
    FitResult out;
    out.gamma = fit.params[0];
    out.delta = fit.params[1];
    out.log_prefactor = fit.params[2];
    out.chi_c = chi_c;
    out.eps_gs = opt.eps_gs;
    out.rows_used = rows.size();
    out.residuals.assign(fit.residuals.data(), fit.residuals.data() + fit.residuals.size());
    out.rms = std::sqrt(fit.sse / static_cast<double>(rows.size()));
    out.window_chi_lo = chi_min - chi_c;
    out.window_chi_hi = chi_max - chi_c;
    out.window_eps_lo = *epss.begin() - opt.eps_gs;
    out.window_eps_hi = *epss.rbegin() - opt.eps_gs;
    if (out.window_chi_hi < 10.0 * out.window_chi_lo)
        throw FitWindowError("fit_exponents: chi - chi_c spans less than one decade (" +
                             std::to_string(out.window_chi_lo) + " .. " + std::to_string(out.window_chi_hi) + ")");
    return out;
}

std::vector<SweepRow> synthetic_table(double gamma, double delta, double chi_c, double eps_gs,
                                      std::span<const double> chis, std::span<const double> reference_eps,
                                      double noise, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<SweepRow> rows;
    for (double eps : reference_eps) {
        for (double chi : chis) {
            SweepRow r;
            r.chi = chi;
            r.eps_r = eps;
            r.seed = seed;
            if (chi > chi_c && eps > eps_gs) {
                r.ratio = std::pow(chi - chi_c, gamma) / std::pow(eps - eps_gs, delta);
                if (noise > 0.0) r.ratio *= std::exp(noise * rng.normal());
                r.defined = true;
            } else {
                r.ratio = 0.0;
                r.defined = true;
            }
            rows.push_back(r);
        }
    }
    return rows;
}

} // namespace iqo
