#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Scratch {
    fs::path dir;
    Scratch() {
        dir = fs::temp_directory_path() / ("iqo_cli_" + std::to_string(::getpid()));
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

int iqo(const std::string& args) {
    const std::string cmd = std::string(IQO_BINARY) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream is(path);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

json read_json(const std::string& path) { return json::parse(slurp(path)); }

} // namespace

TEST_SUITE("cli") {
    TEST_CASE("gen is byte-for-byte deterministic") {
        Scratch s;
        REQUIRE(iqo("gen --n 12 --j 1.0 --seed 5 --out " + (s / "a.json")) == 0);
        const auto first = slurp(s / "a.json");
        REQUIRE(iqo("gen --n 12 --j 1.0 --seed 5 --out " + (s / "a.json")) == 0);
        CHECK(slurp(s / "a.json") == first);
        const auto j = read_json(s / "a.json");
        CHECK(j["n"] == 12);
        CHECK(j["meta"]["flags"]["seed"] == "5");
        CHECK(j["meta"]["version"].is_string());
    }

    TEST_CASE("usage errors exit with 64") {
        Scratch s;
        CHECK(iqo("gen --n 1") == 64);
        CHECK(iqo("gen") == 64);
        CHECK(iqo("") == 64);
        REQUIRE(iqo("gen --n 6 --out " + (s / "i.json")) == 0);
        CHECK(iqo("spectrum --instance " + (s / "i.json") + " --chi 0") == 64);
        CHECK(iqo("run --instance " + (s / "i.json") + " --budget 0") == 64);
        CHECK(iqo("spectrum --instance " + (s / "i.json") + " --ref ground --chi 1,x") == 64);
    }

    TEST_CASE("missing input files exit with 2") {
        Scratch s;
        CHECK(iqo("minima --instance " + (s / "nope.json")) == 2);
        CHECK(iqo("fit --in " + (s / "nope.csv")) == 2);
    }

    TEST_CASE("dense spectrum beyond the limit needs --low-k") {
        Scratch s;
        REQUIRE(iqo("gen --n 13 --out " + (s / "i.json")) == 0);
        const std::string base = "spectrum --instance " + (s / "i.json") + " --ref anneal --chi 1 --bz-grid 1 ";
        CHECK(iqo(base + "--out " + (s / "d.csv")) == 1);
        CHECK(iqo(base + "--low-k 4 --out " + (s / "k.csv")) == 0);
    }

    TEST_CASE("spectrum rows are canonical regardless of --jobs") {
        Scratch s;
        REQUIRE(iqo("gen --n 6 --seed 2 --out " + (s / "i.json")) == 0);
        const std::string base = "spectrum --instance " + (s / "i.json") + " --ref ground --chi 1,0 --bz-grid 2,0:1:3 ";
        REQUIRE(iqo(base + "--jobs 1 --out " + (s / "a.csv")) == 0);
        REQUIRE(iqo(base + "--jobs 3 --out " + (s / "b.csv")) == 0);
        auto strip = [](std::string text) { return text.substr(text.find('\n') + 1); };
        const auto a = strip(slurp(s / "a.csv"));
        CHECK(a == strip(slurp(s / "b.csv")));
        CHECK(a.rfind("bz,bx,k,eigenvalue\n0,0,0,", 0) == 0);
        // 2 slopes x 4 fields x 64 levels plus the column header
        CHECK(std::count(a.begin(), a.end(), '\n') == 1 + 2 * 4 * 64);
    }

    TEST_CASE("synthetic basin sweep recovers the exponents") {
        Scratch s;
        REQUIRE(iqo("basin --synthetic gamma=1.2,delta=2.0,chi_c=3.6 --chis 4:40:37 --eps-r-list "
                    "-1.45,-1.4,-1.3,-1.2,-1.1,-1.0 --out " +
                    (s / "s.csv") + " --fit-out " + (s / "f.json")) == 0);
        const auto f = read_json(s / "f.json");
        CHECK(f["gamma"].get<double>() == doctest::Approx(1.2).epsilon(0.02));
        CHECK(f["delta"].get<double>() == doctest::Approx(2.0).epsilon(0.02));
        CHECK(f["chi_c"].get<double>() == doctest::Approx(3.6).epsilon(0.02));
        CHECK(f["meta"]["command"] == "basin");

        REQUIRE(iqo("fit --in " + (s / "s.csv") + " --out " + (s / "g.json")) == 0);
        CHECK(read_json(s / "g.json")["gamma"].get<double>() == doctest::Approx(f["gamma"].get<double>()));
    }

    TEST_CASE("a single slope is a fit-window error and keeps the table") {
        Scratch s;
        CHECK(iqo("basin --synthetic gamma=1.2,delta=2.0,chi_c=3.6 --chis 6 --out " + (s / "s.csv") +
                  " --fit-out " + (s / "f.json")) == 3);
        const auto csv = slurp(s / "s.csv");
        CHECK(csv.find("chi,eps_r,n_above,n_below,ratio,stderr,seed") != std::string::npos);
        CHECK_FALSE(fs::exists(s / "f.json"));
    }

    TEST_CASE("ensemble sweep is independent of --jobs") {
        Scratch s;
        const std::string base = "basin --n 100 --curves 200 --chis 0,4,8 --eps-r-list -1.3,-1.2 --reps 3 ";
        REQUIRE(iqo(base + "--jobs 1 --out " + (s / "a.csv") + " --fit-out " + (s / "fa.json")) != 64);
        REQUIRE(iqo(base + "--jobs 4 --out " + (s / "b.csv") + " --fit-out " + (s / "fb.json")) != 64);
        auto body = [](std::string text) { return text.substr(text.find('\n') + 1); };
        CHECK(body(slurp(s / "a.csv")) == body(slurp(s / "b.csv")));
    }

    TEST_CASE("run log reference energies never increase") {
        Scratch s;
        REQUIRE(iqo("gen --n 8 --seed 11 --out " + (s / "i.json")) == 0);
        REQUIRE(iqo("run --instance " + (s / "i.json") +
                    " --start highest --sa-t-hot 0 --sa-t-cold 0 --chi 0.5 --budget 15 --oracle --log " + (s / "log.jsonl") +
                    " --out " + (s / "sum.json")) == 0);
        std::ifstream is(s / "log.jsonl");
        std::string line;
        REQUIRE(std::getline(is, line));
        CHECK(json::parse(line).contains("meta"));
        double prev = INFINITY;
        int cycles = 0;
        while (std::getline(is, line)) {
            const double e = json::parse(line)["reference_energy"].get<double>();
            CHECK(e <= prev);
            prev = e;
            ++cycles;
        }
        const auto sum = read_json(s / "sum.json");
        CHECK(sum["n_c"].get<int>() == cycles);
        CHECK(sum["ground_energy"].is_number());
        CHECK(sum["reached_ground"].is_boolean());
    }

    TEST_CASE("config file values are overridden by flags") {
        Scratch s;
        {
            std::ofstream cfg(s / "c.json");
            cfg << R"({"n": 6, "j": 2.0, "gen": {"seed": 9}})";
        }
        REQUIRE(iqo("gen --config " + (s / "c.json") + " --out " + (s / "a.json")) == 0);
        REQUIRE(iqo("gen --config " + (s / "c.json") + " --seed 4 --out " + (s / "b.json")) == 0);
        const auto a = read_json(s / "a.json");
        const auto b = read_json(s / "b.json");
        CHECK(a["n"] == 6);
        CHECK(a["seed"] == 9);
        CHECK(a["j_scale"].get<double>() == 2.0);
        CHECK(b["seed"] == 4);
        CHECK(iqo("gen --config " + (s / "missing.json")) == 2);
    }
}
