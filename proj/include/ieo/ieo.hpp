#pragma once

/// @file ieo.hpp
/// @brief The gated optimizer: the GA of evolution.hpp with a learned screen
/// in front of the fitness function.
///
/// Lifecycle of a run:
///  1. Warm-up. Every solution is evaluated until the number of fitness
///     calls reaches warmup_fraction * planned evaluations.
///  2. At the start of the first generation after warm-up the estimator is
///     trained on the parent-pair dataset of all evaluated history, then
///     retrained every retrain_interval_generations generations.
///  3. While a usable model exists, each offspring is evaluated only if it
///     is predicted to dominate at least one parent; otherwise it is marked
///     Null, never evaluated, and loses every survivor tournament to an
///     evaluated solution.
/// The model is frozen within a generation, so screening order is irrelevant.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ieo/classifier.hpp"
#include "ieo/estimator.hpp"
#include "ieo/evolution.hpp"
#include "ieo/gbt.hpp"

namespace ieo {

struct IeoConfig {
    GaConfig ga;
    double warmup_fraction = 0.15;
    std::size_t retrain_interval_generations = 5;
    GbtParams estimator;
    double decision_threshold = 0.5;
    /// Overrides the gradient-boosted-trees trainer when set.
    std::shared_ptr<const ClassifierTrainer> trainer;
};

void validate(const IeoConfig& config);

/// Inputs of the two guards, captured at the start of a generation.
struct GateState {
    std::size_t evaluations_performed = 0;
    std::size_t planned_evaluations = 0;
    double warmup_fraction = 0.15;
    bool model_available = false;
    std::size_t current_generation = 0;
    std::optional<std::size_t> last_training_generation;
    std::size_t retrain_interval = 5;
};

bool warmup_complete(const GateState& state);

/// Screening is active: warm-up is over and a non-degenerate model exists.
bool estimate_condition(const GateState& state);

/// Train now: warm-up is over and either no training has happened yet or
/// at least retrain_interval generations have passed since the last one.
bool train_condition(const GateState& state);

enum class Verdict { Evaluate, Skip, WarmupEvaluate };

const char* to_string(Verdict verdict);

struct GateDecision {
    SolutionId solution = 0;
    bool estimated = false;
    Verdict verdict = Verdict::WarmupEvaluate;
    std::optional<double> probability1;
    std::optional<double> probability2;
};

/// Screens one pending offspring.
GateDecision gate(const Solution& child, const Solution* parent1, const Solution* parent2,
                  const GateState& state, const DominanceModel* model, const ParameterSpace& space,
                  double threshold = kDefaultDecisionThreshold);

RunTrace run_ieo(const IeoConfig& config, const FitnessFunction& fitness);

}  // namespace ieo
