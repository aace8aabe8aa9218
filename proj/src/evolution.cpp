#include "ieo/evolution.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

namespace ieo {

void validate(const GaConfig& config) {
    if (config.population_size < 2 || config.population_size % 2 != 0)
        throw std::invalid_argument("ga.population_size must be an even number >= 2");
    if (config.generations == 0) throw std::invalid_argument("ga.generations must be positive");
    if (!(config.crossover_probability >= 0.0 && config.crossover_probability <= 1.0))
        throw std::invalid_argument("ga.crossover_probability must lie in [0, 1]");
    if (config.mutation_probability &&
        !(*config.mutation_probability >= 0.0 && *config.mutation_probability <= 1.0))
        throw std::invalid_argument("ga.mutation_probability must lie in [0, 1]");
    if (!(config.eta_c > 0.0)) throw std::invalid_argument("ga.eta_c must be positive");
    if (!(config.eta_m > 0.0)) throw std::invalid_argument("ga.eta_m must be positive");
    if (config.tournament_size == 0) throw std::invalid_argument("ga.tournament_size must be positive");
}

// --- operators --------------------------------------------------------------

double sbx_beta(double u, double eta_c) {
    const double exponent = 1.0 / (eta_c + 1.0);
    if (u <= 0.5) return std::pow(2.0 * u, exponent);
    return std::pow(1.0 / (2.0 * (1.0 - u)), exponent);
}

std::pair<double, double> sbx_gene(double x1, double x2, double lower, double upper, double eta_c,
                                   double u) {
    const double beta = sbx_beta(u, eta_c);
    const double c1 = 0.5 * ((1.0 + beta) * x1 + (1.0 - beta) * x2);
    const double c2 = 0.5 * ((1.0 - beta) * x1 + (1.0 + beta) * x2);
    return {std::clamp(c1, lower, upper), std::clamp(c2, lower, upper)};
}

std::pair<Genome, Genome> sbx_crossover(const Genome& p1, const Genome& p2, double eta_c,
                                        const ParameterSpace& space, std::span<const double> draws) {
    if (p1.size() != space.size() || p2.size() != space.size() || draws.size() != space.size())
        throw ContractViolation("sbx_crossover: genome, space and draw lengths differ");
    Genome c1 = p1;
    Genome c2 = p2;
    for (std::size_t i = 0; i < space.size(); ++i) {
        // Identical genes stay put; the formula would reproduce them anyway.
        if (p1[i] == p2[i]) continue;
        std::tie(c1[i], c2[i]) = sbx_gene(p1[i], p2[i], space[i].lower, space[i].upper, eta_c, draws[i]);
    }
    return {std::move(c1), std::move(c2)};
}

std::pair<Genome, Genome> sbx_crossover(const Genome& p1, const Genome& p2, double eta_c,
                                        const ParameterSpace& space, Rng& rng) {
    std::vector<double> draws(space.size());
    for (auto& u : draws) u = rng.uniform01();
    return sbx_crossover(p1, p2, eta_c, space, draws);
}

double polynomial_mutate_gene(double x, double lower, double upper, double eta_m, double u) {
    const double width = upper - lower;
    const double delta1 = (x - lower) / width;
    const double delta2 = (upper - x) / width;
    const double power = 1.0 / (eta_m + 1.0);
    double deltaq = 0.0;
    if (u < 0.5) {
        const double xy = 1.0 - delta1;
        const double val = 2.0 * u + (1.0 - 2.0 * u) * std::pow(xy, eta_m + 1.0);
        deltaq = std::pow(val, power) - 1.0;
    } else {
        const double xy = 1.0 - delta2;
        const double val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(xy, eta_m + 1.0);
        deltaq = 1.0 - std::pow(val, power);
    }
    return std::clamp(x + deltaq * width, lower, upper);
}

Genome polynomial_mutation(const Genome& genome, double eta_m, double probability,
                           const ParameterSpace& space, Rng& rng) {
    if (genome.size() != space.size())
        throw ContractViolation("polynomial_mutation: genome length does not match space");
    Genome out = genome;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!rng.bernoulli(probability)) continue;
        out[i] = polynomial_mutate_gene(out[i], space[i].lower, space[i].upper, eta_m, rng.uniform01());
    }
    return out;
}

namespace {

bool ranks_above(const Solution& a, const Solution& b) {
    switch (compare_with_null(a, b)) {
    case Preference::First: return true;
    case Preference::Second: return false;
    case Preference::Tie: return a.id < b.id;
    }
    return false;
}

}  // namespace

std::size_t tournament_select(std::span<const Solution> population, std::size_t k, Rng& rng) {
    if (population.empty()) throw ContractViolation("tournament over an empty population");
    std::size_t best = rng.index(population.size());
    for (std::size_t draw = 1; draw < k; ++draw) {
        const std::size_t other = rng.index(population.size());
        if (ranks_above(population[other], population[best])) best = other;
    }
    return best;
}

// --- trace ------------------------------------------------------------------

const char* to_string(Decision decision) {
    switch (decision) {
    case Decision::Evaluated: return "evaluated";
    case Decision::Skipped: return "skipped";
    case Decision::Warmup: return "warmup";
    }
    return "?";
}

Decision decision_from_string(const std::string& text) {
    if (text == "evaluated") return Decision::Evaluated;
    if (text == "skipped") return Decision::Skipped;
    if (text == "warmup") return Decision::Warmup;
    throw std::invalid_argument("unknown decision '" + text + "'");
}

std::optional<double> RunTrace::best_objective() const {
    std::optional<double> best;
    const bool maximize = !directions.empty() && directions[0] == Direction::Maximize;
    for (const auto& r : records) {
        if (!r.has_objectives()) continue;
        const double v = r.objectives[0];
        if (!best || (maximize ? v > *best : v < *best)) best = v;
    }
    return best;
}

bool same_search_path(const RunTrace& a, const RunTrace& b) {
    auto fold = [](Decision d) { return d == Decision::Warmup ? Decision::Evaluated : d; };
    if (a.directions != b.directions || a.records.size() != b.records.size() ||
        a.evaluations_count != b.evaluations_count || a.skips_count != b.skips_count)
        return false;
    if (a.best_per_generation.size() != b.best_per_generation.size()) return false;
    for (std::size_t i = 0; i < a.best_per_generation.size(); ++i) {
        const double x = a.best_per_generation[i];
        const double y = b.best_per_generation[i];
        if (!(x == y || (std::isnan(x) && std::isnan(y)))) return false;
    }
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        const auto& x = a.records[i];
        const auto& y = b.records[i];
        if (x.id != y.id || x.generation != y.generation || fold(x.decision) != fold(y.decision) ||
            x.parent1 != y.parent1 || x.parent2 != y.parent2 || x.genome != y.genome ||
            x.objectives != y.objectives || x.probability1 != y.probability1 ||
            x.probability2 != y.probability2 || x.note != y.note)
            return false;
    }
    return true;
}

// --- engine -----------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

/// Calls the fitness function; exceptions become a Failed solution.
void evaluate_into(Solution& s, const FitnessFunction& fitness, const std::vector<Direction>& directions) {
    const auto t0 = Clock::now();
    try {
        auto objectives = fitness.evaluate(s.genome);
        if (objectives.directions != directions)
            throw std::runtime_error("fitness returned objectives of the wrong shape");
        s.objectives = std::move(objectives);
        s.state = ObjectiveState::Evaluated;
    } catch (const std::exception& e) {
        s.state = ObjectiveState::Failed;
        s.note = std::string("evaluation failed: ") + e.what();
    }
    s.eval_wall_ms = ms_since(t0);
}

TraceRecord make_record(const Solution& s, const PolicyVerdict& verdict, double cumulative_ms) {
    TraceRecord r;
    r.id = s.id;
    r.generation = s.generation;
    r.decision = verdict.decision;
    r.parent1 = s.parent1;
    r.parent2 = s.parent2;
    r.genome = s.genome;
    if (s.evaluated()) r.objectives = s.objectives.values;
    r.probability1 = verdict.probability1;
    r.probability2 = verdict.probability2;
    r.eval_ms = s.eval_wall_ms.value_or(0.0);
    r.cumulative_ms = cumulative_ms;
    r.note = s.note;
    return r;
}

class Engine {
public:
    Engine(const GaConfig& config, const FitnessFunction& fitness, EvaluationPolicy* policy)
        : config_(config),
          fitness_(fitness),
          space_(fitness.space()),
          policy_(policy),
          rng_(config.seed),
          directions_(fitness.directions()) {}

    RunTrace run() {
        start_ = Clock::now();
        trace_.directions = directions_;

        std::vector<Solution> population(config_.population_size);
        for (auto& s : population) {
            s.id = next_id_++;
            s.genome = sample_uniform(space_, rng_);
        }
        const Decision initial = policy_ ? policy_->initial_decision() : Decision::Evaluated;
        std::vector<PolicyVerdict> verdicts(population.size(), PolicyVerdict{initial, {}, {}});
        evaluate_generation(population, verdicts);
        record_best(population);

        for (std::size_t g = 1; g <= config_.generations; ++g) {
            if (policy_) {
                if (auto event = policy_->begin_generation(g)) {
                    event->cumulative_ms = ms_since(start_);
                    trace_.trainings.push_back(*event);
                }
            }
            auto [offspring, parents] = breed(population, g);
            for (std::size_t i = 0; i < offspring.size(); ++i) {
                verdicts[i] = policy_ ? policy_->decide(offspring[i], population[parents[i].first],
                                                        population[parents[i].second])
                                      : PolicyVerdict{};
            }
            evaluate_generation(offspring, verdicts);
            population = select_survivors(std::move(population), std::move(offspring));
            record_best(population);
        }
        trace_.total_wall_ms = ms_since(start_);
        return std::move(trace_);
    }

private:
    /// Selection and variation for one generation. All randomness of the
    /// generation's offspring is consumed here.
    std::pair<std::vector<Solution>, std::vector<std::pair<std::size_t, std::size_t>>> breed(
        const std::vector<Solution>& population, std::size_t generation) {
        std::vector<Solution> offspring;
        std::vector<std::pair<std::size_t, std::size_t>> parents;
        offspring.reserve(config_.population_size);
        const double pm = config_.mutation_rate(space_.size());
        while (offspring.size() < config_.population_size) {
            const std::size_t a = tournament_select(population, config_.tournament_size, rng_);
            const std::size_t b = tournament_select(population, config_.tournament_size, rng_);
            Genome g1 = population[a].genome;
            Genome g2 = population[b].genome;
            if (rng_.bernoulli(config_.crossover_probability))
                std::tie(g1, g2) = sbx_crossover(g1, g2, config_.eta_c, space_, rng_);
            g1 = polynomial_mutation(g1, config_.eta_m, pm, space_, rng_);
            g2 = polynomial_mutation(g2, config_.eta_m, pm, space_, rng_);
            for (auto* g : {&g1, &g2}) {
                Solution child;
                child.id = next_id_++;
                child.genome = std::move(*g);
                child.parent1 = population[a].id;
                child.parent2 = population[b].id;
                child.generation = generation;
                offspring.push_back(std::move(child));
                parents.emplace_back(a, b);
            }
        }
        return {std::move(offspring), std::move(parents)};
    }

    void evaluate_generation(std::vector<Solution>& batch, const std::vector<PolicyVerdict>& verdicts) {
        const bool parallel = config_.parallel_evaluation && fitness_.concurrency_safe();
        if (parallel) {
            std::vector<std::future<void>> jobs;
            for (std::size_t i = 0; i < batch.size(); ++i) {
                if (verdicts[i].decision == Decision::Skipped) continue;
                jobs.push_back(std::async(std::launch::async, [this, &batch, i] {
                    evaluate_into(batch[i], fitness_, directions_);
                }));
            }
            for (auto& j : jobs) j.get();
        }
        for (std::size_t i = 0; i < batch.size(); ++i) {
            auto& s = batch[i];
            if (verdicts[i].decision == Decision::Skipped) {
                s.state = ObjectiveState::Null;
                ++trace_.skips_count;
            } else {
                if (!parallel) evaluate_into(s, fitness_, directions_);
                ++trace_.evaluations_count;
            }
            trace_.records.push_back(make_record(s, verdicts[i], ms_since(start_)));
        }
        if (policy_) {
            for (const auto& s : batch)
                if (s.state != ObjectiveState::Null) policy_->on_evaluated(s);
        }
    }

    std::vector<Solution> select_survivors(std::vector<Solution> parents, std::vector<Solution> offspring) {
        if (!config_.elitist_survival) return offspring;
        std::vector<Solution> pool = std::move(parents);
        pool.insert(pool.end(), std::make_move_iterator(offspring.begin()),
                    std::make_move_iterator(offspring.end()));
        std::size_t elite = 0;
        for (std::size_t i = 1; i < pool.size(); ++i)
            if (ranks_above(pool[i], pool[elite])) elite = i;
        std::vector<Solution> next;
        next.reserve(config_.population_size);
        next.push_back(pool[elite]);
        while (next.size() < config_.population_size)
            next.push_back(pool[tournament_select(pool, config_.tournament_size, rng_)]);
        return next;
    }

    void record_best(const std::vector<Solution>& population) {
        const Solution* best = nullptr;
        for (const auto& s : population)
            if (s.evaluated() && (!best || ranks_above(s, *best))) best = &s;
        trace_.best_per_generation.push_back(best ? best->objectives.values[0]
                                                  : std::numeric_limits<double>::quiet_NaN());
    }

    const GaConfig& config_;
    const FitnessFunction& fitness_;
    const ParameterSpace& space_;
    EvaluationPolicy* policy_;
    Rng rng_;
    std::vector<Direction> directions_;
    SolutionId next_id_ = 0;
    Clock::time_point start_;
    RunTrace trace_;
};

}  // namespace

RunTrace run_generational(const GaConfig& config, const FitnessFunction& fitness,
                          EvaluationPolicy* policy) {
    validate(config);
    return Engine(config, fitness, policy).run();
}

RunTrace run_ea(const GaConfig& config, const FitnessFunction& fitness) {
    return run_generational(config, fitness, nullptr);
}

}  // namespace ieo
