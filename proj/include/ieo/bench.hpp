#pragma once

/// @file bench.hpp
/// @brief Paired EA-vs-IEO experiments and their statistics.
///
/// Trial i runs both arms with seed base_seed + i, the same fitness function
/// and the same budget, so both arms start from the same initial population.
/// Per-trial time saving is 1 - time(IEO) / time(EA); the reported mean is
/// the arithmetic mean of those per-trial fractions.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ieo/evolution.hpp"
#include "ieo/ieo.hpp"
#include "ieo/objectives.hpp"

namespace ieo {

inline constexpr int kResultSchemaVersion = 1;

enum class Arm { EA, IEO };

const char* to_string(Arm arm);
Arm arm_from_string(const std::string& text);

/// Builds a fresh fitness instance for a trial.
using FitnessFactory = std::function<FitnessPtr(std::size_t trial)>;

struct ExperimentConfig {
    IeoConfig ieo;  // ieo.ga.seed is replaced per trial
    std::size_t repeats = 30;
    std::uint64_t base_seed = 0;
    /// Where trace.csv, result.json and report.txt go; empty writes nothing.
    std::filesystem::path output_dir;
    std::size_t trial_parallelism = 1;
    /// Checked between trials; when it becomes true the run stops and the
    /// partial result is flagged truncated.
    const std::atomic<bool>* cancel = nullptr;
    std::string fitness_label;
    /// Copied verbatim into the result document.
    nlohmann::json metadata = nlohmann::json::object();
};

struct TrialRecord {
    std::size_t trial = 0;
    Arm arm = Arm::EA;
    std::uint64_t seed = 0;
    double wall_time_ms = 0.0;
    double best_objective = 0.0;
    std::size_t convergence_iteration = 0;
    std::size_t evaluations = 0;
    std::size_t skips = 0;
};

struct ExperimentSummary {
    std::size_t completed_trials = 0;
    std::vector<double> time_saving;  // per trial
    double mean_time_saving = 0.0;
    double max_time_saving = 0.0;
    /// 1 / (1 - max_time_saving).
    double max_speedup = 1.0;
    /// IEO skips over IEO planned evaluations, pooled across trials.
    double skip_rate = 0.0;
    std::size_t ea_evaluations = 0;
    std::size_t ieo_evaluations = 0;
    std::size_t ieo_skips = 0;
    std::optional<double> wilcoxon_time;
    std::optional<double> ttest_time;
    std::optional<double> wilcoxon_convergence;
    std::optional<double> ttest_convergence;
    std::optional<double> wilcoxon_optimality;
    std::optional<double> ttest_optimality;
    /// Values divided by the EA arm's maximum; empty when that maximum is not positive.
    std::vector<double> normalized_time_ea;
    std::vector<double> normalized_time_ieo;
    std::vector<double> normalized_convergence_ea;
    std::vector<double> normalized_convergence_ieo;
    std::vector<double> normalized_best_ea;
    std::vector<double> normalized_best_ieo;
};

struct ExperimentResult {
    int schema_version = kResultSchemaVersion;
    std::string fitness;
    std::size_t repeats_requested = 0;
    std::uint64_t base_seed = 0;
    std::size_t trial_parallelism = 1;
    bool truncated = false;
    std::vector<TrialRecord> records;  // ordered by trial, EA before IEO
    ExperimentSummary summary;
    std::vector<std::string> warnings;
    nlohmann::json metadata = nlohmann::json::object();
};

/// First generation whose best-so-far equals the run's final best. Throws
/// std::invalid_argument if the trace holds no evaluated solution.
std::size_t convergence_iteration(const RunTrace& trace);

TrialRecord summarize_trial(std::size_t trial, Arm arm, std::uint64_t seed, const RunTrace& trace);

/// Aggregates over trials that have both arms.
ExperimentSummary compute_summary(const std::vector<TrialRecord>& records, std::vector<std::string>* warnings = nullptr);

ExperimentResult run_experiment(const ExperimentConfig& config, const FitnessFactory& make_fitness);

/// Plain-text report; a pure function of the result.
std::string summarize(const ExperimentResult& result);

nlohmann::json to_json(const ExperimentResult& result);
/// Throws std::invalid_argument on a schema-version mismatch or malformed document.
ExperimentResult result_from_json(const nlohmann::json& doc);

}  // namespace ieo
