// Calibration of the local-minimum energy density used by the basin model,
// plus ground-state energy densities for checking the energy convention.
#include <cstdio>

#include <CLI11.hpp>

#include "iqo/basin_model.hpp"
#include "iqo/classical.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Calibrate the minima energy density against exhaustive enumeration"};
    std::size_t n_min = 8;
    std::size_t n_max = 14;
    std::size_t instances = 40;
    std::uint64_t seed = 2024;
    app.add_option("--n-min", n_min);
    app.add_option("--n-max", n_max)->check(CLI::Range(2, 20));
    app.add_option("--instances", instances);
    app.add_option("--seed", seed);
    CLI11_PARSE(app, argc, argv);

    std::printf("n,instances,minima_per_instance,mean_eps,stddev_eps,mean_ground_eps\n");
    for (std::size_t n = n_min; n <= n_max; n += 2) {
        const auto fit = iqo::calibrate_energy_density(n, instances, seed);
        std::printf("%zu,%zu,%.3f,%.5f,%.5f,%.5f\n", n, fit.instances,
                    static_cast<double>(fit.minima) / static_cast<double>(fit.instances), fit.mean_eps,
                    fit.stddev_eps, fit.mean_ground_eps);
    }
    return 0;
}
