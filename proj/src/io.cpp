#include "iqo/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "iqo/errors.hpp"

namespace iqo {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void write_csv_meta(std::ostream& os, const nlohmann::json& meta) { os << "# " << meta.dump() << '\n'; }

nlohmann::json instance_to_json(const SkInstance& inst) {
    nlohmann::json j;
    j["n"] = inst.n();
    j["j_scale"] = inst.j_scale();
    j["seed"] = inst.seed();
    std::vector<double> lower;
    lower.reserve(inst.n() * (inst.n() - 1) / 2);
    for (std::size_t i = 1; i < inst.n(); ++i)
        for (std::size_t k = 0; k < i; ++k) lower.push_back(inst.coupling(i, k));
    j["couplings"] = lower;
    return j;
}

SkInstance instance_from_json(const nlohmann::json& j) {
    try {
        const auto n = j.at("n").get<std::size_t>();
        const auto lower = j.at("couplings").get<std::vector<double>>();
        if (n < 2) throw InvalidArgument("instance file: n must be >= 2");
        if (lower.size() != n * (n - 1) / 2)
            throw InvalidArgument("instance file: expected " + std::to_string(n * (n - 1) / 2) + " couplings, got " +
                                  std::to_string(lower.size()));
        std::vector<double> m(n * n, 0.0);
        std::size_t p = 0;
        for (std::size_t i = 1; i < n; ++i)
            for (std::size_t k = 0; k < i; ++k, ++p) m[i * n + k] = m[k * n + i] = lower[p];
        return SkInstance(n, j.at("j_scale").get<double>(), j.at("seed").get<std::uint64_t>(), std::move(m));
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("instance file: ") + e.what());
    }
}

void save_instance(const std::string& path, const SkInstance& inst, const nlohmann::json& meta) {
    auto j = instance_to_json(inst);
    j["meta"] = meta;
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path + " for writing");
    os << j.dump(1) << '\n';
    if (!os) throw IoError("failed writing " + path);
}

SkInstance load_instance(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open instance file " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("cannot parse instance file " + path + ": " + e.what());
    }
    return instance_from_json(j);
}

void write_minima_csv(std::ostream& os, const std::vector<LocalMinimum>& minima, const nlohmann::json& meta) {
    write_csv_meta(os, meta);
    os << "rank,energy,per_spin_energy,bitstring_hex\n";
    for (std::size_t r = 0; r < minima.size(); ++r)
        os << r << ',' << format_double(minima[r].energy) << ',' << format_double(minima[r].per_spin_energy) << ','
           << minima[r].config.to_hex() << '\n';
}

void write_spectrum_header(std::ostream& os, const nlohmann::json& meta) {
    write_csv_meta(os, meta);
    os << "bz,bx,k,eigenvalue\n";
}

void write_spectrum_rows(std::ostream& os, const FieldPoint& f, const std::vector<double>& levels) {
    const auto bz = format_double(f.bz);
    const auto bx = format_double(f.bx);
    for (std::size_t k = 0; k < levels.size(); ++k)
        os << bz << ',' << bx << ',' << k << ',' << format_double(levels[k]) << '\n';
}

nlohmann::json cycle_to_json(const CycleResult& r, std::size_t index, double reference_energy) {
    nlohmann::json j;
    j["cycle"] = index;
    j["chi"] = r.chi;
    j["bz_max"] = r.bz_max;
    j["measured"] = r.measured.to_hex();
    j["descended"] = r.descended.config.to_hex();
    j["energy_before"] = r.energy_before;
    j["energy_after"] = r.energy_after;
    j["accepted"] = r.accepted;
    j["reference_energy"] = reference_energy;
    j["min_gap_seen"] = r.min_gap_seen ? nlohmann::json(*r.min_gap_seen) : nlohmann::json(nullptr);
    j["norm_drift"] = r.norm_drift;
    return j;
}

nlohmann::json run_summary_json(const RunRecord& rec) {
    nlohmann::json j;
    j["n"] = rec.n;
    j["instance_seed"] = rec.instance_seed;
    j["initial_energy"] = rec.initial_reference.energy;
    j["initial_reference"] = rec.initial_reference.config.to_hex();
    j["final_energy"] = rec.final_reference.energy;
    j["final_per_spin_energy"] = rec.final_reference.per_spin_energy;
    j["final_reference"] = rec.final_reference.config.to_hex();
    j["n_c"] = rec.n_c;
    j["acceptance_fraction"] = rec.acceptance_fraction();
    j["chi_trace"] = rec.chi_trace;
    j["reference_energy_trace"] = rec.reference_energy_trace;
    j["cycle_time"] = rec.cycle_time;
    j["simulated_time"] = rec.simulated_time;
    j["wall_clock_s"] = rec.wall_clock_s;
    j["ground_energy"] = rec.ground_energy ? nlohmann::json(*rec.ground_energy) : nlohmann::json(nullptr);
    j["reached_ground"] = rec.ground_energy ? nlohmann::json(rec.reached_ground) : nlohmann::json(nullptr);
    return j;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows, const nlohmann::json& meta) {
    write_csv_meta(os, meta);
    os << "chi,eps_r,n_above,n_below,ratio,stderr,seed\n";
    for (const auto& r : rows)
        os << format_double(r.chi) << ',' << format_double(r.eps_r) << ',' << r.n_above << ',' << r.n_below << ','
           << (r.defined ? format_double(r.ratio) : std::string("nan")) << ',' << format_double(r.std_error) << ','
           << r.seed << '\n';
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

double parse_double(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw InvalidArgument("bad number in CSV: " + s);
    return v;
}

} // namespace

std::vector<SweepRow> read_sweep_csv(std::istream& is) {
    std::vector<SweepRow> rows;
    std::string line;
    bool header = false;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line != "chi,eps_r,n_above,n_below,ratio,stderr,seed")
                throw InvalidArgument("sweep CSV: unexpected header '" + line + "'");
            header = true;
            continue;
        }
        const auto cells = split_csv(line);
        if (cells.size() != 7) throw InvalidArgument("sweep CSV: expected 7 columns: " + line);
        SweepRow r;
        r.chi = parse_double(cells[0]);
        r.eps_r = parse_double(cells[1]);
        r.n_above = static_cast<std::size_t>(std::stoull(cells[2]));
        r.n_below = static_cast<std::size_t>(std::stoull(cells[3]));
        r.ratio = parse_double(cells[4]);
        r.std_error = parse_double(cells[5]);
        r.seed = std::stoull(cells[6]);
        r.defined = !std::isnan(r.ratio);
        rows.push_back(r);
    }
    if (!header) throw InvalidArgument("sweep CSV: missing header");
    return rows;
}

nlohmann::json fit_to_json(const FitResult& fit) {
    nlohmann::json j;
    j["gamma"] = fit.gamma;
    j["delta"] = fit.delta;
    j["chi_c"] = fit.chi_c;
    j["log_prefactor"] = fit.log_prefactor;
    j["eps_gs"] = fit.eps_gs;
    j["rms"] = fit.rms;
    j["rows_used"] = fit.rows_used;
    j["residuals"] = fit.residuals;
    j["window"] = {{"chi_minus_chi_c", {fit.window_chi_lo, fit.window_chi_hi}},
                   {"eps_r_minus_eps_gs", {fit.window_eps_lo, fit.window_eps_hi}}};
    return j;
}

void write_phase_csv(std::ostream& os, const std::vector<PhasePoint>& points, const nlohmann::json& meta) {
    write_csv_meta(os, meta);
    os << "chi,bz,bx\n";
    for (const auto& p : points)
        os << format_double(p.chi) << ',' << format_double(p.bz) << ',' << format_double(p.bx) << '\n';
}

} // namespace iqo
