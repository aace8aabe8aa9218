#pragma once

/// @file evolution.hpp
/// @brief Real-coded generational GA: SBX crossover, bounded polynomial
/// mutation, k-way tournament selection, and the run trace every experiment
/// metric is derived from.
///
/// The engine exposes one hook, EvaluationPolicy, which decides per offspring
/// whether the fitness function is actually called. run_ea() uses no policy;
/// the IEO optimizer plugs its learned gate in there. Everything that consumes
/// randomness happens outside the hook, so a policy that never skips leaves
/// the trace untouched.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ieo/core.hpp"
#include "ieo/objectives.hpp"
#include "ieo/random.hpp"

namespace ieo {

struct GaConfig {
    std::size_t population_size = 30;
    std::size_t generations = 50;
    double crossover_probability = 1.0;
    /// Per-gene mutation probability; 1/n when unset.
    std::optional<double> mutation_probability;
    double eta_c = 15.0;
    double eta_m = 20.0;
    std::size_t tournament_size = 2;
    std::uint64_t seed = 0;
    /// Survivors chosen from parents+offspring with the best one always kept.
    /// When false the offspring replace the parents wholesale.
    bool elitist_survival = true;
    /// Evaluate a generation's offspring concurrently (fitness must be
    /// concurrency-safe, otherwise evaluation stays sequential).
    bool parallel_evaluation = false;

    double mutation_rate(std::size_t dimension) const {
        return mutation_probability.value_or(1.0 / static_cast<double>(dimension));
    }
    /// Fitness calls a run makes without skipping: pop * (generations + 1).
    std::size_t planned_evaluations() const { return population_size * (generations + 1); }
};

/// Throws std::invalid_argument describing the first bad field.
void validate(const GaConfig& config);

// --- operators --------------------------------------------------------------

/// SBX spread factor for a given uniform draw u in [0, 1).
double sbx_beta(double u, double eta_c);

/// One gene of SBX with an explicit draw: c1 = ((1+b)x1 + (1-b)x2)/2 and
/// c2 = ((1-b)x1 + (1+b)x2)/2, both clamped to [lower, upper].
std::pair<double, double> sbx_gene(double x1, double x2, double lower, double upper, double eta_c,
                                   double u);

/// SBX with one draw per gene taken from `draws` (length n).
std::pair<Genome, Genome> sbx_crossover(const Genome& p1, const Genome& p2, double eta_c,
                                        const ParameterSpace& space, std::span<const double> draws);
std::pair<Genome, Genome> sbx_crossover(const Genome& p1, const Genome& p2, double eta_c,
                                        const ParameterSpace& space, Rng& rng);

/// Bounded polynomial mutation of a single gene with an explicit draw.
double polynomial_mutate_gene(double x, double lower, double upper, double eta_m, double u);

Genome polynomial_mutation(const Genome& genome, double eta_m, double probability,
                           const ParameterSpace& space, Rng& rng);

/// Draws k members with replacement and returns the index of the best under
/// compare_with_null; ties go to the lower solution id.
std::size_t tournament_select(std::span<const Solution> population, std::size_t k, Rng& rng);

// --- trace ------------------------------------------------------------------

enum class Decision { Evaluated, Skipped, Warmup };

const char* to_string(Decision decision);
Decision decision_from_string(const std::string& text);

struct TraceRecord {
    SolutionId id = 0;
    std::size_t generation = 0;
    Decision decision = Decision::Evaluated;
    std::optional<SolutionId> parent1;
    std::optional<SolutionId> parent2;
    Genome genome;
    /// Empty when the solution was skipped or its evaluation failed.
    std::vector<double> objectives;
    std::optional<double> probability1;
    std::optional<double> probability2;
    double eval_ms = 0.0;
    double cumulative_ms = 0.0;
    std::string note;

    bool has_objectives() const { return !objectives.empty(); }
};

struct TrainingEvent {
    std::size_t generation = 0;
    std::size_t evaluations_before = 0;
    std::size_t pair_count = 0;
    bool produced_model = false;
    double training_ms = 0.0;
    double cumulative_ms = 0.0;
};

struct RunTrace {
    std::vector<Direction> directions;
    std::vector<TraceRecord> records;
    std::vector<TrainingEvent> trainings;
    /// Objective 0 of the best retained solution after each generation.
    std::vector<double> best_per_generation;
    double total_wall_ms = 0.0;
    std::size_t evaluations_count = 0;
    std::size_t skips_count = 0;

    /// Best evaluated objective-0 value in the whole run, direction aware.
    std::optional<double> best_objective() const;
};

/// True when both traces agree on everything except timing fields, treating
/// Warmup and Evaluated as the same decision.
bool same_search_path(const RunTrace& a, const RunTrace& b);

// --- engine -----------------------------------------------------------------

struct PolicyVerdict {
    Decision decision = Decision::Evaluated;
    std::optional<double> probability1;
    std::optional<double> probability2;
};

/// Hook deciding which offspring are evaluated. Calls arrive in this order
/// each generation: begin_generation, decide for every offspring (in id
/// order), then on_evaluated for every solution the fitness function saw.
class EvaluationPolicy {
public:
    virtual ~EvaluationPolicy() = default;

    /// Called before offspring of `generation` are screened. Returns the
    /// training event if the policy did any model fitting.
    virtual std::optional<TrainingEvent> begin_generation(std::size_t generation) = 0;
    virtual PolicyVerdict decide(const Solution& child, const Solution& parent1,
                                 const Solution& parent2) = 0;
    virtual void on_evaluated(const Solution& solution) = 0;
    /// Label recorded for initial-population evaluations.
    virtual Decision initial_decision() const { return Decision::Evaluated; }
};

/// Generational GA loop shared by EA and IEO. `policy` may be null.
RunTrace run_generational(const GaConfig& config, const FitnessFunction& fitness,
                          EvaluationPolicy* policy);

/// The baseline EA: every offspring is evaluated.
RunTrace run_ea(const GaConfig& config, const FitnessFunction& fitness);

}  // namespace ieo
