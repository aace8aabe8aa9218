#pragma once

/// @file core.hpp
/// @brief Parameter spaces, genomes, solutions and the dominance relation.
///
/// Everything the optimizers, the estimator and the harness share. Types are
/// plain values; once built they are never mutated behind the caller's back.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ieo/random.hpp"

namespace ieo {

/// Raised when a caller breaks an operation's precondition.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

enum class ParamKind { Continuous, Integer, Categorical };

const char* to_string(ParamKind kind);
ParamKind param_kind_from_string(const std::string& text);

/// One tunable dimension. Categorical labels are encoded as 0..m-1, so
/// lower = 0 and upper = m-1 for those.
struct ParameterSpec {
    std::string name;
    ParamKind kind = ParamKind::Continuous;
    double lower = 0.0;
    double upper = 1.0;
    std::vector<std::string> categories;

    static ParameterSpec continuous(std::string name, double lower, double upper);
    static ParameterSpec integer(std::string name, long lower, long upper);
    static ParameterSpec categorical(std::string name, std::vector<std::string> labels);

    double width() const { return upper - lower; }
    bool operator==(const ParameterSpec&) const = default;
};

/// Ordered, validated list of dimensions. Throws std::invalid_argument on
/// construction if a spec is malformed or a name repeats.
class ParameterSpace {
public:
    explicit ParameterSpace(std::vector<ParameterSpec> specs);

    std::size_t size() const { return specs_.size(); }
    const ParameterSpec& operator[](std::size_t i) const { return specs_[i]; }
    std::span<const ParameterSpec> specs() const { return specs_; }

    bool operator==(const ParameterSpace&) const = default;

private:
    std::vector<ParameterSpec> specs_;
};

/// A point in a ParameterSpace. Integer and categorical dimensions are held
/// as reals so the real-coded operators apply; decode() rounds them.
struct Genome {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
    bool operator==(const Genome&) const = default;
};

Genome sample_uniform(const ParameterSpace& space, Rng& rng);

/// Maps each gene affinely onto [0, 1].
std::vector<double> normalize_features(const Genome& genome, const ParameterSpace& space);
Genome denormalize_features(std::span<const double> features, const ParameterSpace& space);

/// Clamps every gene into its bounds.
void clamp_to_bounds(Genome& genome, const ParameterSpace& space);
bool within_bounds(const Genome& genome, const ParameterSpace& space);

/// Genome as the fitness function sees it: integer/categorical genes rounded.
std::vector<double> decode(const Genome& genome, const ParameterSpace& space);

enum class Direction { Minimize, Maximize };

const char* to_string(Direction direction);
Direction direction_from_string(const std::string& text);

struct ObjectiveVector {
    std::vector<double> values;
    std::vector<Direction> directions;

    ObjectiveVector() = default;
    /// Throws ContractViolation unless sizes match, d >= 1 and values are finite.
    ObjectiveVector(std::vector<double> values, std::vector<Direction> directions);

    std::size_t size() const { return values.size(); }
    bool operator==(const ObjectiveVector&) const = default;
};

/// Pareto dominance: a is no worse anywhere and strictly better somewhere.
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

using SolutionId = std::uint64_t;

enum class ObjectiveState {
    Pending,    ///< not yet decided
    Evaluated,  ///< fitness returned objectives
    Null,       ///< skipped by the gate; never passed to the fitness function
    Failed,     ///< fitness was called and raised; ranks like Null
};

struct Solution {
    SolutionId id = 0;
    Genome genome;
    ObjectiveState state = ObjectiveState::Pending;
    ObjectiveVector objectives;  ///< meaningful only when state == Evaluated
    std::optional<SolutionId> parent1;
    std::optional<SolutionId> parent2;
    std::size_t generation = 0;
    std::optional<double> eval_wall_ms;
    std::string note;

    bool evaluated() const { return state == ObjectiveState::Evaluated; }
    bool is_offspring() const { return parent1.has_value() && parent2.has_value(); }
};

enum class Preference { First, Second, Tie };

/// Selection ordering. Evaluated beats Null/Failed; two Null/Failed tie;
/// two evaluated solutions are ordered by dominance. Throws
/// ContractViolation if either side is Pending.
Preference compare_with_null(const Solution& a, const Solution& b);

}  // namespace ieo
