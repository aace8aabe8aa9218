#pragma once

/// @file estimator.hpp
/// @brief Dominance-labeled training data and the offspring screening rule.
///
/// Two ways of turning evaluation history into pairs:
///  - parent pairs: every offspring is compared with each of its two parents
///    (what the live optimizer trains on, matching what it later asks);
///  - all pairs: every unordered pair of evaluated solutions, ordered by id
///    (used for offline estimator studies).
/// Features are the bounds-normalized genomes of both solutions, concatenated.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ieo/classifier.hpp"
#include "ieo/core.hpp"
#include "ieo/gbt.hpp"

namespace ieo {

std::vector<double> pair_features(const Genome& first, const Genome& second, const ParameterSpace& space);

/// Offspring whose parent is missing from `history` or unevaluated are
/// skipped. Non-evaluated entries in `history` throw ContractViolation.
TrainingSet build_parent_pairs_dataset(std::span<const Solution> history, const ParameterSpace& space);

/// k(k-1)/2 pairs, first element the lower id.
TrainingSet build_all_pairs_dataset(std::span<const Solution> history, const ParameterSpace& space);

/// Trains on the parent-pairs dataset of `history`.
std::shared_ptr<const DominanceModel> train_model(std::span<const Solution> history,
                                                  const ParameterSpace& space,
                                                  const ClassifierTrainer& trainer);

inline constexpr double kDefaultDecisionThreshold = 0.5;

/// probability >= threshold. Throws ContractViolation on a length mismatch.
bool predict(const DominanceModel& model, std::span<const double> features,
             double threshold = kDefaultDecisionThreshold);

struct Estimate {
    bool worth_evaluating = true;
    std::optional<double> probability1;
    std::optional<double> probability2;
};

/// Worth evaluating when the child is predicted to dominate either parent.
/// A missing parent always yields "evaluate".
Estimate estimate(const Solution& child, const Solution* parent1, const Solution* parent2,
                  const DominanceModel& model, const ParameterSpace& space,
                  double threshold = kDefaultDecisionThreshold);

// --- CSV exchange -----------------------------------------------------------

/// Columns f_0..f_{2n-1}, label.
void write_training_set_csv(std::ostream& out, const TrainingSet& data);
TrainingSet read_training_set_csv(std::istream& in);

// --- offline evaluation -----------------------------------------------------

struct EstimatorEvalOptions {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    GbtParams gbt;
};

struct EstimatorEvalReport {
    std::size_t solutions = 0;
    std::size_t pairs = 0;
    std::size_t train_pairs = 0;
    std::size_t test_pairs = 0;
    double label1_fraction = 0.0;
    double model_train_accuracy = 0.0;
    double model_test_accuracy = 0.0;
    double baseline_train_accuracy = 0.0;
    double baseline_test_accuracy = 0.0;
    double training_ms = 0.0;
    std::vector<std::string> warnings;
};

inline constexpr std::size_t kMinEstimatorEvalSolutions = 10;

/// Builds the all-pairs dataset, shuffles it with `seed`, splits it and
/// compares gradient-boosted trees with a majority-class baseline.
/// Throws std::invalid_argument with fewer than 10 evaluated solutions.
EstimatorEvalReport evaluate_estimator(std::span<const Solution> evaluated, const ParameterSpace& space,
                                       const EstimatorEvalOptions& options);

double accuracy(const DominanceModel& model, std::span<const TrainingPair> pairs,
                double threshold = kDefaultDecisionThreshold);

}  // namespace ieo
