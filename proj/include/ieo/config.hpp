#pragma once

/// @file config.hpp
/// @brief JSON configuration documents.
///
/// A config is one JSON object with the sections
///
///     {
///       "space":      [ {"name": "x0", "kind": "continuous", "lower": -1, "upper": 1}, ... ],
///       "fitness":    {"type": "synthetic", "name": "sphere", "dimension": 5, "delay_ms": 20},
///       "ga":         {"population_size": 30, "generations": 50, ...},
///       "ieo":        {"warmup_fraction": 0.15, "retrain_interval_generations": 5,
///                      "decision_threshold": 0.5, "estimator": {"n_trees": 100, ...}},
///       "experiment": {"repeats": 30, "base_seed": 0, "trial_parallelism": 1}
///     }
///
/// Only "fitness" is required. Fitness types:
///   synthetic  name, dimension, delay_ms; "space" optionally overrides the
///              default box bounds (continuous dimensions only)
///   knn        dataset (CSV path, relative to the config file), label_column,
///              split_seed, delay_ms
///   command    command, directions (["maximize", ...]), concurrency_safe;
///              requires "space"
/// Unknown keys are rejected. A run manifest is also accepted wherever a
/// config is: its embedded "config" snapshot is used.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "ieo/ieo.hpp"
#include "ieo/objectives.hpp"

namespace ieo {

struct ExperimentSettings {
    std::size_t repeats = 30;
    std::uint64_t base_seed = 0;
    std::size_t trial_parallelism = 1;
};

struct ToolConfig {
    nlohmann::json fitness;  // resolved, with defaults filled in
    std::optional<ParameterSpace> space;
    IeoConfig ieo;
    ExperimentSettings experiment;
};

inline constexpr int kManifestVersion = 1;

struct LoadedConfig {
    ToolConfig config;
    /// The manifest document when the file was a manifest.
    std::optional<nlohmann::json> manifest;
};

/// Throws ConfigError whose message starts with the offending key path.
ToolConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
LoadedConfig load_config(const std::filesystem::path& path);

/// Fully resolved snapshot; parse_config(config_to_json(c)) reproduces c.
nlohmann::json config_to_json(const ToolConfig& config);

FitnessPtr make_fitness(const ToolConfig& config);

ParameterSpace parse_space(const nlohmann::json& doc);
nlohmann::json space_to_json(const ParameterSpace& space);

}  // namespace ieo
