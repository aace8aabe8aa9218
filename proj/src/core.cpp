#include "ieo/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace ieo {

const char* to_string(ParamKind kind) {
    switch (kind) {
    case ParamKind::Continuous: return "continuous";
    case ParamKind::Integer: return "integer";
    case ParamKind::Categorical: return "categorical";
    }
    return "?";
}

ParamKind param_kind_from_string(const std::string& text) {
    if (text == "continuous") return ParamKind::Continuous;
    if (text == "integer") return ParamKind::Integer;
    if (text == "categorical") return ParamKind::Categorical;
    throw std::invalid_argument("unknown parameter kind '" + text +
                                "' (expected continuous, integer or categorical)");
}

ParameterSpec ParameterSpec::continuous(std::string name, double lower, double upper) {
    return {std::move(name), ParamKind::Continuous, lower, upper, {}};
}

ParameterSpec ParameterSpec::integer(std::string name, long lower, long upper) {
    return {std::move(name), ParamKind::Integer, static_cast<double>(lower),
            static_cast<double>(upper), {}};
}

ParameterSpec ParameterSpec::categorical(std::string name, std::vector<std::string> labels) {
    const double upper = labels.empty() ? 0.0 : static_cast<double>(labels.size() - 1);
    return {std::move(name), ParamKind::Categorical, 0.0, upper, std::move(labels)};
}

ParameterSpace::ParameterSpace(std::vector<ParameterSpec> specs) : specs_(std::move(specs)) {
    if (specs_.empty()) throw std::invalid_argument("parameter space must not be empty");
    std::set<std::string> names;
    for (const auto& spec : specs_) {
        if (spec.name.empty()) throw std::invalid_argument("parameter name must not be empty");
        if (!names.insert(spec.name).second)
            throw std::invalid_argument("duplicate parameter name '" + spec.name + "'");
        if (!std::isfinite(spec.lower) || !std::isfinite(spec.upper))
            throw std::invalid_argument("parameter '" + spec.name + "' has non-finite bounds");
        if (spec.kind == ParamKind::Categorical) {
            if (spec.categories.size() < 2)
                throw std::invalid_argument("categorical parameter '" + spec.name +
                                            "' needs at least 2 categories");
            if (spec.lower != 0.0 || spec.upper != static_cast<double>(spec.categories.size() - 1))
                throw std::invalid_argument("categorical parameter '" + spec.name +
                                            "' must span 0..m-1");
        } else if (!(spec.lower < spec.upper)) {
            throw std::invalid_argument("parameter '" + spec.name + "' needs lower < upper");
        }
        if (spec.kind == ParamKind::Integer &&
            (std::floor(spec.lower) != spec.lower || std::floor(spec.upper) != spec.upper))
            throw std::invalid_argument("integer parameter '" + spec.name +
                                        "' needs integral bounds");
    }
}

Genome sample_uniform(const ParameterSpace& space, Rng& rng) {
    Genome genome;
    genome.values.reserve(space.size());
    for (const auto& spec : space.specs()) {
        const double u = rng.uniform01();
        if (spec.kind == ParamKind::Continuous) {
            genome.values.push_back(std::min(spec.lower + u * spec.width(), spec.upper));
        } else {
            // Each of the width+1 integer levels is equally likely.
            const double level = std::floor(u * (spec.width() + 1.0));
            genome.values.push_back(std::min(spec.lower + level, spec.upper));
        }
    }
    return genome;
}

std::vector<double> normalize_features(const Genome& genome, const ParameterSpace& space) {
    if (genome.size() != space.size())
        throw ContractViolation("genome length does not match parameter space");
    std::vector<double> features(genome.size());
    for (std::size_t i = 0; i < genome.size(); ++i)
        features[i] = (genome[i] - space[i].lower) / space[i].width();
    return features;
}

Genome denormalize_features(std::span<const double> features, const ParameterSpace& space) {
    if (features.size() != space.size())
        throw ContractViolation("feature length does not match parameter space");
    Genome genome;
    genome.values.resize(features.size());
    for (std::size_t i = 0; i < features.size(); ++i)
        genome[i] = space[i].lower + features[i] * space[i].width();
    return genome;
}

void clamp_to_bounds(Genome& genome, const ParameterSpace& space) {
    for (std::size_t i = 0; i < genome.size(); ++i)
        genome[i] = std::clamp(genome[i], space[i].lower, space[i].upper);
}

bool within_bounds(const Genome& genome, const ParameterSpace& space) {
    if (genome.size() != space.size()) return false;
    for (std::size_t i = 0; i < genome.size(); ++i)
        if (!(genome[i] >= space[i].lower && genome[i] <= space[i].upper)) return false;
    return true;
}

std::vector<double> decode(const Genome& genome, const ParameterSpace& space) {
    if (genome.size() != space.size())
        throw ContractViolation("genome length does not match parameter space");
    std::vector<double> out(genome.values);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (space[i].kind != ParamKind::Continuous)
            out[i] = std::clamp(std::round(out[i]), space[i].lower, space[i].upper);
    }
    return out;
}

const char* to_string(Direction direction) {
    return direction == Direction::Minimize ? "minimize" : "maximize";
}

Direction direction_from_string(const std::string& text) {
    if (text == "minimize" || text == "min") return Direction::Minimize;
    if (text == "maximize" || text == "max") return Direction::Maximize;
    throw std::invalid_argument("unknown direction '" + text + "' (expected minimize or maximize)");
}

ObjectiveVector::ObjectiveVector(std::vector<double> v, std::vector<Direction> d)
    : values(std::move(v)), directions(std::move(d)) {
    if (values.empty()) throw ContractViolation("objective vector needs at least one value");
    if (values.size() != directions.size())
        throw ContractViolation("objective values and directions differ in length");
    for (double x : values)
        if (!std::isfinite(x)) throw ContractViolation("objective values must be finite");
}

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
    if (a.size() != b.size() || a.directions != b.directions)
        throw ContractViolation("dominance needs objective vectors of the same shape");
    bool strictly_better = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const bool maximize = a.directions[i] == Direction::Maximize;
        const double gain = maximize ? a.values[i] - b.values[i] : b.values[i] - a.values[i];
        if (gain < 0.0) return false;
        if (gain > 0.0) strictly_better = true;
    }
    return strictly_better;
}

Preference compare_with_null(const Solution& a, const Solution& b) {
    if (a.state == ObjectiveState::Pending || b.state == ObjectiveState::Pending)
        throw ContractViolation("pending solutions cannot be ranked");
    const bool ea = a.evaluated();
    const bool eb = b.evaluated();
    if (ea && !eb) return Preference::First;
    if (!ea && eb) return Preference::Second;
    if (!ea && !eb) return Preference::Tie;
    if (dominates(a.objectives, b.objectives)) return Preference::First;
    if (dominates(b.objectives, a.objectives)) return Preference::Second;
    return Preference::Tie;
}

}  // namespace ieo
