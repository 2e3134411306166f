#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "kljn/attack.hpp"
#include "kljn/protocol.hpp"

namespace kljn::harness {

struct PrivacyParams {
    double p0 = 0.75;
    std::size_t stages = 4;

    void validate() const;
};

// Everything an experiment needs, in one validated block. Counts left at 0
// fall back to per-experiment defaults.
struct ExperimentConfig {
    std::string experiment;
    std::uint64_t master_seed = 1;
    std::size_t n_periods = 0;
    std::size_t n_trials = 0;
    std::size_t n_training = 150;
    std::string output_dir = ".";
    protocol::KljnParams kljn;  // includes the cable
    protocol::RrrtParams rrrt;
    attack::EveConfig eve;
    attack::DcScenario dc;
    PrivacyParams privacy;

    void validate() const;
};

const std::vector<std::string>& experiment_names();

// TOML-subset parser: [section] headers, key = value with numbers, booleans,
// quoted strings and flat integer arrays, # comments. Unknown keys are
// rejected by name; the result is fully validated.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Canonical text form; parse_config(serialize(c)) reproduces c exactly.
std::string serialize(const ExperimentConfig& config);

struct Report {
    std::string summary;
    std::vector<std::string> csv_paths;
};

// Runs the configured experiment, writes its CSV under output_dir and
// returns the human-readable summary. Deterministic in the config.
Report run_experiment(const ExperimentConfig& config);

}  // namespace kljn::harness
