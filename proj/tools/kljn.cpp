#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "kljn/harness.hpp"

namespace {

struct Overrides {
    std::uint64_t seed = 0;
    bool has_seed = false;
    std::string out;
    std::uint64_t trials = 0;
};

void add_override_options(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--seed", ov.seed, "Master seed override")
        ->each([&ov](const std::string&) { ov.has_seed = true; });
    cmd->add_option("--out", ov.out, "Output directory override");
    cmd->add_option("--trials", ov.trials,
                    "Trial/period count override (0 keeps the default)");
}

void apply(const Overrides& ov, kljn::harness::ExperimentConfig& config) {
    if (ov.has_seed) config.master_seed = ov.seed;
    if (!ov.out.empty()) config.output_dir = ov.out;
    if (ov.trials > 0) {
        config.n_trials = ov.trials;
        config.n_periods = ov.trials;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"KLJN secure key exchange simulator"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides ov;

    auto* run = app.add_subcommand("run", "Run an experiment described by a config file");
    run->add_option("config", config_path, "Path to the TOML config")->required();
    add_override_options(run, ov);

    // one alias per experiment, running it with built-in defaults
    for (const auto& name : kljn::harness::experiment_names()) {
        auto* cmd = app.add_subcommand(name, "Run the " + name +
                                                 " experiment with default settings");
        add_override_options(cmd, ov);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        kljn::harness::ExperimentConfig config;
        if (run->parsed()) {
            config = kljn::harness::load_config(config_path);
        } else {
            config.experiment = app.get_subcommands().front()->get_name();
        }
        apply(ov, config);
        config.validate();

        const auto report = kljn::harness::run_experiment(config);
        std::cout << report.summary;
        for (const auto& p : report.csv_paths) std::cout << "wrote " << p << "\n";
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
