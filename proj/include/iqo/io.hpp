#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "iqo/basin_model.hpp"
#include "iqo/protocol.hpp"
#include "iqo/quantum.hpp"
#include "iqo/sk.hpp"

namespace iqo {

inline constexpr const char* kVersion = "0.3.0";

/// Shortest round-trip-safe form with 17 significant digits, '.' decimal,
/// independent of the global locale.
std::string format_double(double x);

/// CSV metadata line: "# " followed by compact JSON.
void write_csv_meta(std::ostream& os, const nlohmann::json& meta);

// Instance file: {"n", "j_scale", "seed", "couplings": lower triangle row-major
// (J_10, J_20, J_21, ...), "meta"}.
nlohmann::json instance_to_json(const SkInstance& inst);
SkInstance instance_from_json(const nlohmann::json& j);
void save_instance(const std::string& path, const SkInstance& inst, const nlohmann::json& meta);
SkInstance load_instance(const std::string& path);

/// rank,energy,per_spin_energy,bitstring_hex
void write_minima_csv(std::ostream& os, const std::vector<LocalMinimum>& minima, const nlohmann::json& meta);

/// bz,bx,k,eigenvalue
void write_spectrum_header(std::ostream& os, const nlohmann::json& meta);
void write_spectrum_rows(std::ostream& os, const FieldPoint& f, const std::vector<double>& levels);

nlohmann::json cycle_to_json(const CycleResult& r, std::size_t index, double reference_energy);
nlohmann::json run_summary_json(const RunRecord& rec);

/// chi,eps_r,n_above,n_below,ratio,stderr,seed
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows, const nlohmann::json& meta);
std::vector<SweepRow> read_sweep_csv(std::istream& is);

nlohmann::json fit_to_json(const FitResult& fit);

/// chi,bz,bx
void write_phase_csv(std::ostream& os, const std::vector<PhasePoint>& points, const nlohmann::json& meta);

} // namespace iqo
