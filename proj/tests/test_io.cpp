#include <doctest.h>

#include <clocale>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "iqo/errors.hpp"
#include "iqo/io.hpp"

using namespace iqo;

namespace {

std::string temp_path(const char* name) { return (std::filesystem::temp_directory_path() / name).string(); }

} // namespace

TEST_SUITE("io") {

TEST_CASE("doubles round trip with 17 significant digits") {
    Rng rng(1);
    for (int t = 0; t < 1000; ++t) {
        const double x = rng.normal() * std::pow(10.0, rng.uniform(-20, 20));
        CHECK(std::stod(format_double(x)) == x);
    }
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(-2.0) == "-2");
    CHECK(format_double(NAN) == "nan");
}

TEST_CASE("formatting ignores the global locale") {
    const char* old = std::setlocale(LC_NUMERIC, nullptr);
    const std::string saved = old ? old : "C";
    if (std::setlocale(LC_NUMERIC, "de_DE.UTF-8") || std::setlocale(LC_NUMERIC, "fr_FR.UTF-8"))
        CHECK(format_double(1.5) == "1.5");
    std::setlocale(LC_NUMERIC, saved.c_str());
}

TEST_CASE("instance files round trip exactly") {
    const auto inst = generate_instance(11, 1.7, 99);
    const auto path = temp_path("iqo_instance_test.json");
    save_instance(path, inst, {{"version", kVersion}});
    const auto back = load_instance(path);
    CHECK(back.n() == 11);
    CHECK(back.j_scale() == 1.7);
    CHECK(back.seed() == 99);
    for (std::size_t k = 0; k < 121; ++k) CHECK(back.couplings()[k] == inst.couplings()[k]);

    std::ifstream in(path);
    nlohmann::json j;
    in >> j;
    CHECK(j["couplings"].size() == 55);
    CHECK(j["couplings"][0].get<double>() == inst.coupling(1, 0));
    CHECK(j["couplings"][2].get<double>() == inst.coupling(2, 1));
    CHECK(j["meta"]["version"] == kVersion);
    std::filesystem::remove(path);
}

TEST_CASE("malformed instance files are rejected") {
    nlohmann::json j{{"n", 3}, {"j_scale", 1.0}, {"seed", 1}, {"couplings", {0.1, 0.2}}};
    CHECK_THROWS_AS(instance_from_json(j), InvalidArgument);
    j["couplings"] = {0.1, 0.2, 0.3};
    CHECK(instance_from_json(j).coupling(2, 1) == 0.3);
    j.erase("j_scale");
    CHECK_THROWS_AS(instance_from_json(j), InvalidArgument);
    CHECK_THROWS_AS(load_instance(temp_path("iqo_missing_instance.json")), IoError);
    const auto bad = temp_path("iqo_bad_instance.json");
    std::ofstream(bad) << "{not json";
    CHECK_THROWS_AS(load_instance(bad), IoError);
    std::filesystem::remove(bad);
}

TEST_CASE("sweep tables round trip") {
    std::vector<SweepRow> rows(3);
    rows[0] = {1.5, -1.2, 4, 10, 0.4, 0.05, true, 7};
    rows[1] = {2.0, -1.2, 0, 0, NAN, 0.0, false, 7};
    rows[2] = {1.0 / 3.0, -1.1, 12, 3, 4.0, 1.25, true, 7};
    std::stringstream ss;
    write_sweep_csv(ss, rows, {{"seed", 7}});
    const auto text = ss.str();
    CHECK(text.rfind("# {", 0) == 0);
    CHECK(text.find("\nchi,eps_r,n_above,n_below,ratio,stderr,seed\n") != std::string::npos);
    const auto back = read_sweep_csv(ss);
    REQUIRE(back.size() == 3);
    CHECK(back[2].chi == 1.0 / 3.0);
    CHECK(back[0].n_above == 4);
    CHECK(back[0].std_error == 0.05);
    CHECK_FALSE(back[1].defined);
    CHECK(back[2].seed == 7);

    std::stringstream bad("a,b\n1,2\n");
    CHECK_THROWS_AS(read_sweep_csv(bad), InvalidArgument);
}

TEST_CASE("spectrum, minima and phase CSV layouts") {
    std::stringstream s;
    write_spectrum_header(s, {{"chi", 0.5}});
    write_spectrum_rows(s, FieldPoint(2.0, 1.0), {-3.0, -2.5});
    CHECK(s.str() == "# {\"chi\":0.5}\nbz,bx,k,eigenvalue\n2,1,0,-3\n2,1,1,-2.5\n");

    const auto inst = generate_instance(4, 1.0, 1);
    std::stringstream m;
    write_minima_csv(m, {make_minimum(inst, SpinConfig::from_index(4, 10))}, nlohmann::json::object());
    CHECK(m.str().find("rank,energy,per_spin_energy,bitstring_hex\n0,") != std::string::npos);
    CHECK(m.str().find(",a\n") != std::string::npos);

    std::stringstream p;
    write_phase_csv(p, {{0.5, 2.0, 1.0}}, nlohmann::json::object());
    CHECK(p.str() == "# {}\nchi,bz,bx\n0.5,2,1\n");
}

TEST_CASE("run and fit summaries carry their fields") {
    FitResult f;
    f.gamma = 1.2;
    f.residuals = {0.1, -0.1};
    const auto fj = fit_to_json(f);
    for (const char* k : {"gamma", "delta", "chi_c", "eps_gs", "rms", "residuals", "window"}) CHECK(fj.contains(k));

    RunRecord rec;
    rec.chi_trace = {1.0};
    rec.reference_energy_trace = {-3.0, -3.0};
    const auto rj = run_summary_json(rec);
    for (const char* k : {"final_energy", "n_c", "acceptance_fraction", "chi_trace", "simulated_time"})
        CHECK(rj.contains(k));
    CHECK(rj["reached_ground"].is_null());
}

} // TEST_SUITE
