#pragma once

/// @file objectives.hpp
/// @brief Fitness functions: closed-form benchmarks, an artificial-cost
/// wrapper, a k-NN tuning objective over tabular data and an external
/// command bridge.

#include <chrono>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "ieo/core.hpp"
#include "ieo/dataset.hpp"

namespace ieo {

/// The expensive black box. evaluate() receives the raw genome; integer and
/// categorical genes are decoded by the implementation as needed.
class FitnessFunction {
public:
    virtual ~FitnessFunction() = default;

    virtual ObjectiveVector evaluate(const Genome& genome) const = 0;
    virtual const ParameterSpace& space() const = 0;
    virtual std::vector<Direction> directions() const = 0;
    /// True when evaluate() may run on several threads at once.
    virtual bool concurrency_safe() const { return true; }
    virtual std::string name() const = 0;
};

using FitnessPtr = std::shared_ptr<const FitnessFunction>;

/// Thrown for unknown benchmark names and similar configuration mistakes.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Sphere, Rastrigin, Ackley or Rosenbrock in `dimension` variables,
/// minimized, optimum value 0 (at the origin; at all-ones for Rosenbrock).
FitnessPtr synthetic_fitness(const std::string& name, std::size_t dimension);
/// Same formulas over caller-chosen continuous bounds.
FitnessPtr synthetic_fitness(const std::string& name, ParameterSpace space);

/// Evaluates `inner`, then sleeps for `delay`. Values pass through untouched.
FitnessPtr delay_wrapper(FitnessPtr inner, std::chrono::microseconds delay);

struct KnnGenome {
    std::size_t k = 1;
    bool inverse_distance = false;
    double p = 2.0;
};

/// Tunes k in [1,25], weighting {uniform, inverse-distance} and the Minkowski
/// exponent p in [1,3]; objective is test accuracy on a stratified 70/30
/// split drawn with `split_seed`, maximized.
class KnnTuningFitness final : public FitnessFunction {
public:
    KnnTuningFitness(TabularDataset dataset, std::uint64_t split_seed);

    ObjectiveVector evaluate(const Genome& genome) const override;
    const ParameterSpace& space() const override { return space_; }
    std::vector<Direction> directions() const override { return {Direction::Maximize}; }
    std::string name() const override { return "knn"; }

    KnnGenome decode_genome(const Genome& genome) const;
    std::size_t train_size() const { return train_rows_.size(); }
    std::size_t test_size() const { return test_rows_.size(); }

private:
    TabularDataset data_;
    ParameterSpace space_;
    std::vector<std::size_t> train_rows_;
    std::vector<std::size_t> test_rows_;
};

FitnessPtr knn_tuning_fitness(TabularDataset dataset, std::uint64_t split_seed);

/// Runs a shell command per evaluation. The decoded genome is written to the
/// command's stdin as {"name": value, ...}; the command must print
/// {"objectives": [...]} on stdout. Nonzero exit or bad output throws.
class CommandFitness final : public FitnessFunction {
public:
    CommandFitness(std::string command, ParameterSpace space, std::vector<Direction> directions,
                   bool concurrency_safe);

    ObjectiveVector evaluate(const Genome& genome) const override;
    const ParameterSpace& space() const override { return space_; }
    std::vector<Direction> directions() const override { return directions_; }
    bool concurrency_safe() const override { return concurrency_safe_; }
    std::string name() const override { return "command"; }

private:
    std::string command_;
    ParameterSpace space_;
    std::vector<Direction> directions_;
    bool concurrency_safe_;
};

}  // namespace ieo
