#pragma once

#include <filesystem>
#include <optional>

#include <nlohmann/json.hpp>

#include "edo/clustering.hpp"
#include "edo/evolution.hpp"

namespace edo {

/// Full experiment description: engine parameters, fitness selector, output
/// root and retention. Parsed from a JSON config file (schema in README).
struct ExperimentConfig {
    EdoConfig edo;
    FitnessSpec fitness;
    std::filesystem::path root;  // empty = resolve from EDO_ROOT / "out"
    int retention_every = 1;     // keep every j-th epoch (plus 0 and final)
    std::optional<int> stop_no_improvement;
    std::optional<double> pm_decay;

    /// The config as JSON with defaults filled in; stored in the manifest
    /// and printed by --dry-run. Round-trips through parse_experiment_config.
    nlohmann::json resolved() const;
};

/// Parse + validate; ConfigError messages name the offending field.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

}  // namespace edo
