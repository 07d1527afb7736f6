#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "lippfm/sim.hpp"

namespace lippfm {

/// One grid axis of initial conditions. count == 1 places the single cell at
/// min (max unused); count >= 2 requires min < max.
struct GridAxis {
    double min = 0.0;
    double max = 0.0;
    int count = 0;

    void validate(const char* name) const;
    // Endpoint-exact, symmetric interpolation: value(i) == -value(count-1-i)
    // bitwise whenever max == -min.
    double value(int i) const;
};

/// Fully resolved run configuration; every field has a default, so a minimal
/// config file (or none) is valid.
struct SweepConfig {
    ModelParams model{};
    LqrWeights weights{};
    TorqueLimits limits{};
    StepPolicy step_policy{};

    GridAxis theta_a{-0.3, 0.3, 61};
    GridAxis theta_a_dot{-1.5, 1.5, 61};

    // episode defaults, shared by grid cells and single-episode runs
    double duration = 5.0;
    double dt = 1e-3;
    double fall_angle = 0.8;
    double settle_angle = 1e-3;
    double settle_rate = 1e-3;
    bool stop_on_step = true;
    State initial_state{};      // `episode` subcommand start state
    Disturbance disturbance{};

    int jobs = 0;  // worker threads; 0 = hardware concurrency
    std::string csv_name = "region_map.csv";
    std::string svg_name = "region_map.svg";

    void validate() const;
    EpisodeConfig episode_config() const;  // from initial_state/disturbance
};

/// Parses and validates a config file; omitted fields keep their defaults.
/// Throws ConfigError with field/position context.
SweepConfig load_config(const std::filesystem::path& path);

/// Validating construction from parsed JSON (unknown keys rejected).
SweepConfig config_from_json(const nlohmann::json& j);

/// Fully resolved echo; loading the echoed document reproduces an identical
/// config and an identical echo byte-for-byte.
nlohmann::json config_to_json(const SweepConfig& config);

/// Writes config_to_json() with stable formatting (2-space indent, sorted
/// keys, trailing newline).
void write_config_echo(const SweepConfig& config, const std::filesystem::path& path);

} // namespace lippfm
