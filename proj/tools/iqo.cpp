// iqo: command-line driver for instances, spectra, annealing cycles and the
// isolated-minima ensemble model.
//
// Exit codes: 0 ok, 1 other runtime failure (e.g. resource limit), 2 I/O,
// 3 fit window, 64 usage.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "iqo/basin_model.hpp"
#include "iqo/classical.hpp"
#include "iqo/errors.hpp"
#include "iqo/io.hpp"
#include "iqo/protocol.hpp"
#include "iqo/quantum.hpp"

using nlohmann::json;
using namespace iqo;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitIo = 2;
constexpr int kExitFit = 3;
constexpr int kExitUsage = 64;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<double> sorted_unique(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

// Comma-separated items, each a number or "lo:hi:count" (count points,
// both ends included).
std::vector<double> parse_list(const std::string& text, const char* what) {
    auto number = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size() || !std::isfinite(v))
            throw UsageError(std::string(what) + ": cannot parse '" + s + "'");
        return v;
    };
    std::vector<double> out;
    std::stringstream items(text);
    for (std::string item; std::getline(items, item, ',');) {
        if (item.empty()) continue;
        if (item.find(':') == std::string::npos) {
            out.push_back(number(item));
            continue;
        }
        std::vector<std::string> parts;
        std::stringstream ss(item);
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
        if (parts.size() != 3) throw UsageError(std::string(what) + ": range must be lo:hi:count");
        const double lo = number(parts[0]);
        const double hi = number(parts[1]);
        const double count = number(parts[2]);
        if (count < 1 || count != std::floor(count)) throw UsageError(std::string(what) + ": bad point count");
        const auto m = static_cast<std::size_t>(count);
        for (std::size_t k = 0; k < m; ++k)
            out.push_back(m == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(m - 1));
    }
    if (out.empty()) throw UsageError(std::string(what) + ": empty list");
    return out;
}

// Writes to a file, or stdout for "" and "-".
class Output {
public:
    explicit Output(const std::string& path) {
        if (path.empty() || path == "-") return;
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw IoError("cannot open " + path + " for writing");
        path_ = path;
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }
    void close() {
        if (!file_) {
            std::cout.flush();
            return;
        }
        file_->close();
        if (!*file_) throw IoError("failed writing " + path_);
    }

private:
    std::unique_ptr<std::ofstream> file_;
    std::string path_;
};

// Version, subcommand and every option value (given or defaulted).
json make_meta(const CLI::App* sub) {
    json flags = json::object();
    for (const CLI::Option* opt : sub->get_options()) {
        const std::string name = opt->get_lnames().empty() ? std::string() : opt->get_lnames().front();
        if (name.empty() || name == "help" || name == "config") continue;
        if (opt->count() > 0) {
            const auto res = opt->reduced_results();
            flags[name] = res.empty() ? std::string("true") : res.back();
        } else if (!opt->get_default_str().empty()) {
            flags[name] = opt->get_default_str();
        }
    }
    return {{"tool", "iqo"}, {"version", kVersion}, {"command", sub->get_name()}, {"flags", flags}};
}

SpinConfig resolve_reference(const SkInstance& inst, const std::string& spec, std::uint64_t seed) {
    if (spec == "anneal") {
        Rng rng(derive_seed(seed, 0xa1));
        const auto start = SpinConfig::random(inst.n(), rng);
        return simulated_anneal(inst, start, 200, 2.0, 0.05, derive_seed(seed, 0xa2)).config;
    }
    if (spec == "ground") return enumerate_minima(inst).front().config;
    if (spec == "highest") return enumerate_minima(inst).back().config;
    return SpinConfig::from_hex(inst.n(), spec);
}

struct CycleFlags {
    double chi = 1.0;
    std::optional<double> bz_max;
    double tau1 = 1.0;
    double tau2 = 10.0;
    double tau3 = 50.0;
    double dt = 0.05;
    std::size_t gap_grid = 0;

    void add_to(CLI::App* sub) {
        sub->add_option("--chi", chi, "Slope B_x/B_z of step 3")->check(CLI::NonNegativeNumber);
        sub->add_option("--bz-max", bz_max, "B_z cap (default: 2 max(B_z^c, J) of the reference)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--tau1", tau1, "Step 1 duration (accounting only)")->check(CLI::PositiveNumber);
        sub->add_option("--tau2", tau2, "Step 2 duration")->check(CLI::PositiveNumber);
        sub->add_option("--tau3", tau3, "Step 3 duration")->check(CLI::PositiveNumber);
        sub->add_option("--dt", dt, "Largest integrator step")->check(CLI::PositiveNumber);
        sub->add_option("--gap-grid", gap_grid, "Estimate the step-3 minimum gap on this many points");
    }

    CycleConfig config(const SkInstance& inst, const SpinConfig& ref, std::uint64_t seed) const {
        CycleConfig c;
        c.chi = chi;
        c.bz_max = bz_max ? *bz_max : default_bz_max(inst, ref);
        c.tau1 = tau1;
        c.tau2 = tau2;
        c.tau3 = tau3;
        c.dt_max = dt;
        c.gap_grid = gap_grid;
        c.seed = seed;
        return c;
    }
};

// ---- gen ------------------------------------------------------------------

struct GenArgs {
    std::size_t n = 0;
    double j = 1.0;
    std::uint64_t seed = 1;
    std::string out;
};

int cmd_gen(const CLI::App* sub, const GenArgs& a) {
    const auto inst = generate_instance(a.n, a.j, a.seed);
    if (a.out.empty() || a.out == "-") {
        auto j = instance_to_json(inst);
        j["meta"] = make_meta(sub);
        std::cout << j.dump(1) << '\n';
        return 0;
    }
    save_instance(a.out, inst, make_meta(sub));
    return 0;
}

// ---- minima ---------------------------------------------------------------

struct MinimaArgs {
    std::string instance;
    std::string out;
};

int cmd_minima(const CLI::App* sub, const MinimaArgs& a) {
    const auto inst = load_instance(a.instance);
    Output out(a.out);
    write_minima_csv(out.stream(), enumerate_minima(inst), make_meta(sub));
    out.close();
    return 0;
}

// ---- spectrum -------------------------------------------------------------

struct SpectrumArgs {
    std::string instance;
    std::string ref;
    std::string chi = "0";
    std::string bz_grid = "0:4:41";
    std::size_t low_k = 0;
    std::string isolate;
    std::string gaps;
    std::string out;
    std::uint64_t seed = 1;
    std::size_t jobs = 1;
};

int cmd_spectrum(const CLI::App* sub, const SpectrumArgs& a) {
    const auto inst = load_instance(a.instance);
    const auto chis = sorted_unique(parse_list(a.chi, "--chi"));
    const auto grid = sorted_unique(parse_list(a.bz_grid, "--bz-grid"));
    for (double b : grid)
        if (b < 0.0) throw UsageError("--bz-grid: fields must be non-negative");
    for (double c : chis)
        if (c < 0.0) throw UsageError("--chi: slopes must be non-negative");
    if (a.low_k == 0 && inst.n() > kMaxDenseSpins)
        throw ResourceLimit("n = " + std::to_string(inst.n()) + " exceeds the dense limit of " +
                            std::to_string(kMaxDenseSpins) + " spins; pass --low-k K");

    const SpinConfig ref = resolve_reference(inst, a.ref, a.seed);
    const ReferenceHamiltonian h(inst, ref);
    SpectrumOptions opt;
    if (a.low_k > 0) {
        opt.mode = SpectrumMode::LowK;
        opt.k = a.low_k;
    }

    std::vector<FieldPoint> points;
    for (double chi : chis)
        for (double bz : grid) points.push_back(FieldPoint::on_ray(chi, bz));
    std::vector<std::vector<double>> levels(points.size());
    const std::size_t jobs = std::clamp<std::size_t>(a.jobs, 1, points.size());
    {
        std::vector<std::exception_ptr> errors(jobs);
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < jobs; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t p = w; p < points.size(); p += jobs)
                        levels[p] = full_spectrum(h, points[p], opt).eigenvalues;
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        pool.clear();
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    auto meta = make_meta(sub);
    meta["reference"] = ref.to_hex();
    meta["reference_energy"] = energy(inst, ref);
    Output out(a.out);
    write_spectrum_header(out.stream(), meta);
    for (std::size_t p = 0; p < points.size(); ++p) write_spectrum_rows(out.stream(), points[p], levels[p]);
    out.close();

    if (!a.gaps.empty()) {
        json g = json::array();
        for (std::size_t c = 0; c < chis.size(); ++c) {
            double best = INFINITY;
            FieldPoint at;
            for (std::size_t k = 0; k < grid.size(); ++k) {
                const auto& lv = levels[c * grid.size() + k];
                // The zero-field point is degenerate by spin-flip symmetry.
                if (lv.size() < 2 || points[c * grid.size() + k] == FieldPoint()) continue;
                if (lv[1] - lv[0] < best) {
                    best = lv[1] - lv[0];
                    at = points[c * grid.size() + k];
                }
            }
            g.push_back({{"chi", chis[c]}, {"min_gap", best}, {"bz", at.bz}, {"bx", at.bx}});
        }
        Output go(a.gaps);
        go.stream() << json{{"meta", meta}, {"gaps", g}}.dump(1) << '\n';
        go.close();
    }

    if (!a.isolate.empty()) {
        const BasinIsolator iso(inst, ref, enumerate_minima(inst));
        Output io(a.isolate);
        write_csv_meta(io.stream(), meta);
        io.stream() << "bz,bx,minimum_id,bitstring_hex,basin_size,tilde_energy\n";
        for (const auto& f : points)
            for (const auto& l : iso.levels(f))
                io.stream() << format_double(f.bz) << ',' << format_double(f.bx) << ',' << l.minimum_id << ','
                            << iso.minima()[l.minimum_id].config.to_hex() << ',' << l.basin_size << ','
                            << format_double(l.tilde_energy) << '\n';
        io.close();
    }
    return 0;
}

// ---- cycle ----------------------------------------------------------------

struct CycleArgs {
    std::string instance;
    std::string ref;
    CycleFlags cycle;
    std::uint64_t seed = 1;
    std::string dump_state;
    std::string out;
};

int cmd_cycle(const CLI::App* sub, const CycleArgs& a) {
    const auto inst = load_instance(a.instance);
    const auto ref = make_minimum(inst, resolve_reference(inst, a.ref, a.seed));
    const auto cfg = a.cycle.config(inst, ref.config, a.seed);
    const auto r = run_cycle(inst, ref, cfg);

    if (!a.dump_state.empty()) {
        // Same schedule as run_cycle, stopped before measurement.
        const ScheduleSegment segs[] = {
            {FieldPoint(cfg.bz_max, 0.0), FieldPoint(cfg.bz_max, cfg.chi * cfg.bz_max), cfg.tau2},
            {FieldPoint(cfg.bz_max, cfg.chi * cfg.bz_max), FieldPoint(0.0, 0.0), cfg.tau3}};
        save_state(a.dump_state, evolve(inst, ref.config, segs, QuantumState::basis(ref.config), cfg.dt_max).state);
    }

    auto j = cycle_to_json(r, 0, r.accepted ? r.energy_after : r.energy_before);
    j["meta"] = make_meta(sub);
    Output out(a.out);
    out.stream() << j.dump(1) << '\n';
    out.close();
    return 0;
}

// ---- run ------------------------------------------------------------------

struct RunArgs {
    std::string instance;
    std::string start = "random";
    CycleFlags cycle;
    int budget = 50;
    std::uint64_t seed = 1;
    bool no_tune = false;
    std::size_t patience = 3;
    double chi_up = 0.05;
    double chi_down = 0.05;
    int sa_sweeps = 200;
    double sa_t_hot = 2.0;
    double sa_t_cold = 0.05;
    std::string tau3_mode = "fixed";
    double tau3_c = 10.0;
    double tau3_cap = 1000.0;
    bool oracle = false;
    std::string log;
    std::string out;
};

int cmd_run(const CLI::App* sub, const RunArgs& a) {
    if (a.budget < 1) throw UsageError("--budget must be at least 1");
    const auto inst = load_instance(a.instance);
    SpinConfig start;
    if (a.start == "random") {
        Rng rng(derive_seed(a.seed, 0x57));
        start = SpinConfig::random(inst.n(), rng);
    } else {
        start = resolve_reference(inst, a.start, a.seed);
    }

    IterateOptions opt;
    opt.sa_sweeps = a.sa_sweeps;
    opt.sa_t_hot = a.sa_t_hot;
    opt.sa_t_cold = a.sa_t_cold;
    opt.auto_bz_max = !a.cycle.bz_max.has_value();
    if (a.oracle) {
        if (inst.n() > kMaxEnumerationSpins)
            throw UsageError("--oracle needs n <= " + std::to_string(kMaxEnumerationSpins));
        opt.ground_energy = ground_state_energy(inst);
    }

    TunerPolicy tuner;
    tuner.enabled = !a.no_tune;
    tuner.patience = a.patience;
    tuner.up = a.chi_up;
    tuner.down = a.chi_down;

    auto cfg = a.cycle.config(inst, start, a.seed);
    std::optional<double> tau3_gap;
    if (a.tau3_mode == "auto") {
        // Gap along the initial reference's ray; c / gap^2, capped.
        const auto seed_ref = simulated_anneal(inst, start, opt.sa_sweeps, opt.sa_t_hot, opt.sa_t_cold,
                                               derive_seed(a.seed, 0x5a));
        const double bz_max = a.cycle.bz_max ? *a.cycle.bz_max : default_bz_max(inst, seed_ref.config);
        std::vector<double> grid(32);
        for (std::size_t k = 0; k < grid.size(); ++k) grid[k] = bz_max * static_cast<double>(32 - k) / 32.0;
        if (cfg.chi > 0.0) {
            GapOptions go;
            go.refine = true;
            tau3_gap = min_gap_along_ray(inst, seed_ref.config, cfg.chi, grid, go).gap;
            cfg.tau3 = suggest_tau3(*tau3_gap, a.tau3_c, a.tau3_cap);
        }
    } else if (a.tau3_mode != "fixed") {
        throw UsageError("--tau3-mode must be 'fixed' or 'auto'");
    }

    const auto rec = iterate(inst, start, cfg, a.budget, tuner, opt);

    const auto meta = make_meta(sub);
    if (!a.log.empty()) {
        Output log(a.log);
        log.stream() << json{{"meta", meta}}.dump() << '\n';
        for (std::size_t k = 0; k < rec.cycles.size(); ++k)
            log.stream() << cycle_to_json(rec.cycles[k], k, rec.reference_energy_trace[k + 1]).dump() << '\n';
        log.close();
    }
    auto summary = run_summary_json(rec);
    summary["tau3"] = cfg.tau3;
    summary["tau3_gap_estimate"] = tau3_gap ? json(*tau3_gap) : json(nullptr);
    summary["meta"] = meta;
    Output out(a.out);
    out.stream() << summary.dump(1) << '\n';
    out.close();
    return 0;
}

// ---- basin / fit / phase --------------------------------------------------

struct EnsembleFlags {
    std::size_t n = 200;
    std::size_t curves = 1000;
    double mean_eps = kDefaultMinimaMeanEps;
    double stddev_eps = kDefaultMinimaStddevEps;
    double j = 1.0;
    double bz_hi = 40.0;
    std::size_t grid = kDefaultCrossingGrid;

    void add_to(CLI::App* sub) {
        sub->add_option("--n", n, "Spin count of the modelled system")->check(CLI::PositiveNumber);
        sub->add_option("--curves", curves, "Isolated-minimum curves per ensemble")->check(CLI::PositiveNumber);
        sub->add_option("--energy-mean", mean_eps, "Mean per-spin energy of the E_l sampler");
        sub->add_option("--energy-sd", stddev_eps, "Std. dev. of the per-spin E_l sampler")
            ->check(CLI::NonNegativeNumber);
        sub->add_option("--j", j, "Coupling scale J")->check(CLI::PositiveNumber);
        sub->add_option("--bz-hi", bz_hi, "Upper end of the B_z scan")->check(CLI::PositiveNumber);
        sub->add_option("--grid", grid, "Crossing-scan grid points")->check(CLI::Range(2, 1 << 24));
    }

    EnsembleFactory factory() const {
        const auto sampler = gaussian_energy_sampler(mean_eps, stddev_eps);
        return [sampler, n = n, curves = curves, j = j](std::uint64_t s, double eps) {
            return sample_ensemble(n, curves, sampler, s, eps, j);
        };
    }
};

struct FitFlags {
    double eps_gs = kSkGroundStateEps;
    std::optional<double> chi_c_lo;
    std::optional<double> chi_c_hi;

    void add_to(CLI::App* sub) {
        sub->add_option("--eps-gs", eps_gs, "Ground-state energy density in the fit");
        sub->add_option("--chi-c-lo", chi_c_lo, "Lower end of the chi_c search");
        sub->add_option("--chi-c-hi", chi_c_hi, "Upper end of the chi_c search");
    }

    FitOptions options() const {
        FitOptions o;
        o.eps_gs = eps_gs;
        if (chi_c_lo) o.chi_c_lo = *chi_c_lo;
        if (chi_c_hi) o.chi_c_hi = *chi_c_hi;
        return o;
    }
};

struct BasinArgs {
    EnsembleFlags ens;
    FitFlags fit;
    std::string chis = "0:12:25";
    std::string eps_r = "-1.4,-1.3,-1.2";
    std::size_t reps = 10;
    std::size_t bootstrap = 200;
    std::uint64_t seed = 1;
    std::size_t jobs = 1;
    std::string synthetic;
    double noise = 0.0;
    std::string out;
    std::string fit_out;
};

struct SyntheticParams {
    double gamma = 1.2;
    double delta = 2.0;
    double chi_c = 3.6;
};

SyntheticParams parse_synthetic(const std::string& text) {
    SyntheticParams p;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw UsageError("--synthetic: expected key=value, got '" + item + "'");
        const std::string key = item.substr(0, eq);
        const double v = parse_list(item.substr(eq + 1), "--synthetic").front();
        if (key == "gamma")
            p.gamma = v;
        else if (key == "delta")
            p.delta = v;
        else if (key == "chi_c")
            p.chi_c = v;
        else
            throw UsageError("--synthetic: unknown key '" + key + "'");
    }
    return p;
}

int fit_and_write(const std::vector<SweepRow>& rows, const FitFlags& flags, const json& meta, const std::string& path) {
    FitResult fit;
    try {
        fit = fit_exponents(rows, flags.options());
    } catch (const FitWindowError& e) {
        std::cerr << "iqo: " << e.what() << '\n';
        return kExitFit;
    }
    auto j = fit_to_json(fit);
    j["meta"] = meta;
    Output out(path);
    out.stream() << j.dump(1) << '\n';
    out.close();
    return 0;
}

int cmd_basin(const CLI::App* sub, const BasinArgs& a) {
    const auto chis = sorted_unique(parse_list(a.chis, "--chis"));
    const auto eps = sorted_unique(parse_list(a.eps_r, "--eps-r-list"));
    const auto meta = make_meta(sub);
    std::vector<SweepRow> rows;
    if (!a.synthetic.empty()) {
        const auto p = parse_synthetic(a.synthetic);
        rows = synthetic_table(p.gamma, p.delta, p.chi_c, a.fit.eps_gs, chis, eps, a.noise, a.seed);
    } else {
        SweepOptions o;
        o.bz_hi = a.ens.bz_hi;
        o.grid = a.ens.grid;
        o.bootstrap = a.bootstrap;
        o.jobs = a.jobs;
        o.seed = a.seed;
        rows = ratio_sweep(a.ens.factory(), chis, eps, a.reps, o);
    }
    Output out(a.out);
    write_sweep_csv(out.stream(), rows, meta);
    out.close();
    if (a.fit_out.empty() && a.out.empty()) return 0; // table went to stdout; nothing else to write
    return fit_and_write(rows, a.fit, meta, a.fit_out);
}

struct FitArgs {
    FitFlags fit;
    std::string in;
    std::string out;
};

int cmd_fit(const CLI::App* sub, const FitArgs& a) {
    std::ifstream is(a.in);
    if (!is) throw IoError("cannot open " + a.in);
    std::vector<SweepRow> rows;
    try {
        rows = read_sweep_csv(is);
    } catch (const InvalidArgument& e) {
        throw IoError(a.in + ": " + e.what());
    }
    return fit_and_write(rows, a.fit, make_meta(sub), a.out);
}

struct PhaseArgs {
    EnsembleFlags ens;
    std::string chis = "0:6:25";
    double eps_r = -1.3;
    std::uint64_t seed = 1;
    std::string out;
};

int cmd_phase(const CLI::App* sub, const PhaseArgs& a) {
    const auto chis = sorted_unique(parse_list(a.chis, "--chis"));
    for (double c : chis)
        if (c < 0.0) throw UsageError("--chis: slopes must be non-negative");
    const auto ens = a.ens.factory()(a.seed, a.eps_r);
    Output out(a.out);
    write_phase_csv(out.stream(), phase_boundary(ens, chis, a.ens.bz_hi, a.ens.grid), make_meta(sub));
    out.close();
    return 0;
}

// ---- config file ------------------------------------------------------------

std::string json_scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) return format_double(v.get<double>());
    return v.dump();
}

// Expands "--config FILE" into flags placed right after the subcommand name,
// so that flags given on the command line (parsed later, TakeLast) win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    auto it = std::find(args.begin(), args.end(), "--config");
    std::string path;
    if (it != args.end()) {
        if (it + 1 == args.end()) throw UsageError("--config needs a file");
        path = *(it + 1);
        args.erase(it, it + 2);
    } else {
        for (auto a = args.begin(); a != args.end(); ++a)
            if (a->rfind("--config=", 0) == 0) {
                path = a->substr(9);
                args.erase(a);
                break;
            }
    }
    if (path.empty()) return args;

    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file " + path);
    json cfg;
    try {
        is >> cfg;
    } catch (const json::exception& e) {
        throw IoError("cannot parse config file " + path + ": " + e.what());
    }
    if (!cfg.is_object()) throw UsageError("config file must hold a JSON object");

    auto sub = std::find_if(args.begin() + 1, args.end(), [](const std::string& s) { return !s.starts_with("-"); });
    if (sub == args.end()) throw UsageError("--config needs a subcommand");
    json flat = json::object();
    for (const auto& [k, v] : cfg.items())
        if (!v.is_object()) flat[k] = v;
    if (cfg.contains(*sub) && cfg[*sub].is_object())
        for (const auto& [k, v] : cfg[*sub].items()) flat[k] = v;

    std::vector<std::string> extra;
    for (const auto& [k, v] : flat.items()) {
        const std::string flag = "--" + k;
        if (v.is_boolean()) {
            if (v.get<bool>()) extra.push_back(flag);
        } else if (v.is_array()) {
            std::string joined;
            for (const auto& e : v) joined += (joined.empty() ? "" : ",") + json_scalar(e);
            extra.push_back(flag);
            extra.push_back(joined);
        } else if (!v.is_null()) {
            extra.push_back(flag);
            extra.push_back(json_scalar(v));
        }
    }
    args.insert(sub + 1, extra.begin(), extra.end());
    return args;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Iterative quantum optimization of SK spin glasses: exact dynamics and the isolated-minima model"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
    app.add_option("--config", "JSON file whose keys mirror the subcommand flags; flags win");

    GenArgs gen;
    auto* s_gen = app.add_subcommand("gen", "Generate an SK instance");
    s_gen->add_option("--n", gen.n, "Spin count")->required()->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20));
    s_gen->add_option("--j", gen.j, "Coupling scale J")->check(CLI::PositiveNumber);
    s_gen->add_option("--seed", gen.seed, "Instance seed");
    s_gen->add_option("--out", gen.out, "Instance JSON path (default stdout)");

    MinimaArgs minima;
    auto* s_min = app.add_subcommand("minima", "List all single-flip-stable configurations (n <= 20)");
    s_min->add_option("--instance", minima.instance, "Instance JSON")->required();
    s_min->add_option("--out", minima.out, "CSV path (default stdout)");

    SpectrumArgs spec;
    auto* s_spec = app.add_subcommand("spectrum", "Low-energy spectra along rays B_x = chi B_z");
    s_spec->add_option("--instance", spec.instance, "Instance JSON")->required();
    s_spec->add_option("--ref", spec.ref, "Reference: bit-string hex, 'anneal', 'ground' or 'highest'")->required();
    s_spec->add_option("--chi", spec.chi, "Slope or list of slopes (a,b,c or lo:hi:count)");
    s_spec->add_option("--bz-grid", spec.bz_grid, "B_z values (a,b,c or lo:hi:count)");
    s_spec->add_option("--low-k", spec.low_k, "Keep the K lowest levels via Lanczos (required for n > 12)");
    s_spec->add_option("--isolate", spec.isolate, "Also write basin-isolated levels to this CSV");
    s_spec->add_option("--gaps", spec.gaps, "Write the minimum E1 - E0 per slope to this JSON");
    s_spec->add_option("--seed", spec.seed, "Seed for --ref anneal");
    s_spec->add_option("--jobs", spec.jobs, "Worker threads")->check(CLI::PositiveNumber);
    s_spec->add_option("--out", spec.out, "CSV path (default stdout)");

    CycleArgs cyc;
    auto* s_cyc = app.add_subcommand("cycle", "Run a single four-step cycle");
    s_cyc->add_option("--instance", cyc.instance, "Instance JSON")->required();
    s_cyc->add_option("--ref", cyc.ref, "Reference minimum: bit-string hex, 'anneal', 'ground' or 'highest'")
        ->required();
    cyc.cycle.add_to(s_cyc);
    s_cyc->add_option("--seed", cyc.seed, "Measurement and descent seed");
    s_cyc->add_option("--dump-state", cyc.dump_state, "Write the pre-measurement state snapshot here");
    s_cyc->add_option("--out", cyc.out, "Result JSON path (default stdout)");

    RunArgs run;
    auto* s_run = app.add_subcommand("run", "Iterate cycles with on-the-fly chi tuning");
    s_run->add_option("--instance", run.instance, "Instance JSON")->required();
    s_run->add_option("--start", run.start, "Start: 'random', bit-string hex, 'anneal', 'ground' or 'highest'");
    run.cycle.add_to(s_run);
    s_run->add_option("--budget", run.budget, "Maximum number of cycles");
    s_run->add_option("--seed", run.seed, "Run seed");
    s_run->add_flag("--no-tune", run.no_tune, "Keep chi fixed");
    s_run->add_option("--patience", run.patience, "Cycles with the same signal before chi changes");
    s_run->add_option("--chi-up", run.chi_up, "Relative chi increase after repeated self-returns");
    s_run->add_option("--chi-down", run.chi_down, "Relative chi decrease after repeated higher minima");
    s_run->add_option("--sa-sweeps", run.sa_sweeps, "Seeding anneal sweeps")->check(CLI::PositiveNumber);
    s_run->add_option("--sa-t-hot", run.sa_t_hot, "Seeding anneal start temperature");
    s_run->add_option("--sa-t-cold", run.sa_t_cold, "Seeding anneal end temperature");
    s_run->add_option("--tau3-mode", run.tau3_mode, "'fixed' or 'auto' (tau3 = c / gap^2)");
    s_run->add_option("--tau3-c", run.tau3_c, "Constant c of the auto tau3 rule");
    s_run->add_option("--tau3-cap", run.tau3_cap, "Cap on the auto tau3");
    s_run->add_flag("--oracle", run.oracle, "Enumerate the ground state (n <= 20) and stop once reached");
    s_run->add_option("--log", run.log, "JSON-lines cycle log");
    s_run->add_option("--out", run.out, "Summary JSON path (default stdout)");

    BasinArgs basin;
    auto* s_basin = app.add_subcommand("basin", "Crossing-ratio sweep over the isolated-minima ensemble, then fit");
    basin.ens.add_to(s_basin);
    basin.fit.add_to(s_basin);
    s_basin->add_option("--chis", basin.chis, "Slopes (a,b,c or lo:hi:count)");
    s_basin->add_option("--eps-r-list", basin.eps_r, "Reference energy densities");
    s_basin->add_option("--reps", basin.reps, "Disorder replicas per cell")->check(CLI::PositiveNumber);
    s_basin->add_option("--bootstrap", basin.bootstrap, "Bootstrap resamples for standard errors");
    s_basin->add_option("--seed", basin.seed, "Sweep seed");
    s_basin->add_option("--jobs", basin.jobs, "Worker threads")->check(CLI::PositiveNumber);
    s_basin->add_option("--synthetic", basin.synthetic, "Replace the sweep by exact ratios: gamma=..,delta=..,chi_c=..");
    s_basin->add_option("--noise", basin.noise, "Multiplicative log-normal noise for --synthetic");
    s_basin->add_option("--out", basin.out, "Sweep CSV path (default stdout)");
    s_basin->add_option("--fit-out", basin.fit_out, "Fit JSON path (default stdout)");

    FitArgs fit;
    auto* s_fit = app.add_subcommand("fit", "Fit the crossing-ratio scaling to a sweep CSV");
    s_fit->add_option("--in", fit.in, "Sweep CSV")->required();
    fit.fit.add_to(s_fit);
    s_fit->add_option("--out", fit.out, "Fit JSON path (default stdout)");

    PhaseArgs phase;
    auto* s_phase = app.add_subcommand("phase", "First-order boundary (B_z^c(chi), chi B_z^c(chi)) of one ensemble");
    phase.ens.add_to(s_phase);
    s_phase->add_option("--chis", phase.chis, "Slopes (a,b,c or lo:hi:count)");
    s_phase->add_option("--eps-r", phase.eps_r, "Reference energy density");
    s_phase->add_option("--seed", phase.seed, "Ensemble seed");
    s_phase->add_option("--out", phase.out, "CSV path (default stdout)");

    try {
        std::vector<std::string> args(argv, argv + argc);
        args = expand_config(std::move(args));
        std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
        app.parse(std::move(rev));

        if (s_gen->parsed()) return cmd_gen(s_gen, gen);
        if (s_min->parsed()) return cmd_minima(s_min, minima);
        if (s_spec->parsed()) return cmd_spectrum(s_spec, spec);
        if (s_cyc->parsed()) return cmd_cycle(s_cyc, cyc);
        if (s_run->parsed()) return cmd_run(s_run, run);
        if (s_basin->parsed()) return cmd_basin(s_basin, basin);
        if (s_fit->parsed()) return cmd_fit(s_fit, fit);
        if (s_phase->parsed()) return cmd_phase(s_phase, phase);
        return kExitUsage;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "iqo: " << e.what() << '\n' << app.help();
        return kExitUsage;
    } catch (const InvalidArgument& e) {
        std::cerr << "iqo: " << e.what() << '\n';
        return kExitUsage;
    } catch (const IoError& e) {
        std::cerr << "iqo: " << e.what() << '\n';
        return kExitIo;
    } catch (const FitWindowError& e) {
        std::cerr << "iqo: " << e.what() << '\n';
        return kExitFit;
    } catch (const std::exception& e) {
        std::cerr << "iqo: " << e.what() << '\n';
        return kExitRuntime;
    }
}
