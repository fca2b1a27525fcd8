#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dsel/error.hpp"
#include "dsel/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Differential CSI feedback experiments"};
    std::string experiment;
    std::string config_path;
    std::string out_path;
    std::uint64_t seed = 0;

    app.add_option("experiment", experiment, "mse_surface | rate_surface | rate_section | capacity")->required();
    app.add_option("--config", config_path, "key = value configuration file")->required();
    auto* seed_opt = app.add_option("--seed", seed, "override the configured seed");
    app.add_option("--out", out_path, "CSV output path (default: config 'out', else stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    dsel::ExperimentConfig cfg;
    try {
        cfg = dsel::load_config(config_path);
        cfg.experiment = dsel::parse_experiment(experiment);
        if (seed_opt->count() > 0) cfg.seed = seed;
        if (!out_path.empty()) cfg.out_path = out_path;
        cfg.validate();
    } catch (const dsel::ConfigError& e) {
        std::cerr << "dsel: " << e.what() << '\n';
        return 1;
    }

    try {
        const std::string csv = dsel::experiment_csv(cfg);
        if (cfg.out_path.empty()) {
            std::cout << csv;
        } else {
            std::ofstream out(cfg.out_path);
            if (!out) throw std::runtime_error("cannot open output file '" + cfg.out_path + "'");
            out << csv;
            if (!out) throw std::runtime_error("failed writing '" + cfg.out_path + "'");
        }
    } catch (const std::exception& e) {
        std::cerr << "dsel: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
