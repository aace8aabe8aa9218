#include "ieo/ieo.hpp"

#include <chrono>
#include <stdexcept>

#include "ieo/estimator.hpp"

namespace ieo {

void validate(const IeoConfig& config) {
    validate(config.ga);
    validate(config.estimator);
    if (!(config.warmup_fraction > 0.0 && config.warmup_fraction <= 1.0))
        throw std::invalid_argument("ieo.warmup_fraction must lie in (0, 1]");
    if (config.retrain_interval_generations == 0)
        throw std::invalid_argument("ieo.retrain_interval_generations must be positive");
    if (!(config.decision_threshold >= 0.0 && config.decision_threshold <= 1.0))
        throw std::invalid_argument("ieo.decision_threshold must lie in [0, 1]");
}

bool warmup_complete(const GateState& state) {
    const double needed = state.warmup_fraction * static_cast<double>(state.planned_evaluations);
    // Tolerate round-off in the product (0.15 * 1000 etc.).
    return static_cast<double>(state.evaluations_performed) + 1e-9 >= needed;
}

bool estimate_condition(const GateState& state) { return state.model_available && warmup_complete(state); }

bool train_condition(const GateState& state) {
    if (!warmup_complete(state)) return false;
    if (!state.last_training_generation) return true;
    return state.current_generation >= *state.last_training_generation + state.retrain_interval;
}

const char* to_string(Verdict verdict) {
    switch (verdict) {
    case Verdict::Evaluate: return "evaluate";
    case Verdict::Skip: return "skip";
    case Verdict::WarmupEvaluate: return "warmup-evaluate";
    }
    return "?";
}

GateDecision gate(const Solution& child, const Solution* parent1, const Solution* parent2,
                  const GateState& state, const DominanceModel* model, const ParameterSpace& space,
                  double threshold) {
    GateDecision d;
    d.solution = child.id;
    if (!estimate_condition(state) || model == nullptr) return d;
    const auto e = estimate(child, parent1, parent2, *model, space, threshold);
    d.estimated = true;
    d.verdict = e.worth_evaluating ? Verdict::Evaluate : Verdict::Skip;
    d.probability1 = e.probability1;
    d.probability2 = e.probability2;
    return d;
}

namespace {

class IeoPolicy final : public EvaluationPolicy {
public:
    IeoPolicy(const IeoConfig& config, const ParameterSpace& space)
        : config_(config),
          space_(space),
          trainer_(config.trainer ? config.trainer : std::make_shared<GbtTrainer>(config.estimator)) {
        state_.planned_evaluations = config.ga.planned_evaluations();
        state_.warmup_fraction = config.warmup_fraction;
        state_.retrain_interval = config.retrain_interval_generations;
    }

    std::optional<TrainingEvent> begin_generation(std::size_t generation) override {
        state_.current_generation = generation;
        if (!train_condition(state_)) return std::nullopt;

        const auto t0 = std::chrono::steady_clock::now();
        const auto data = build_parent_pairs_dataset(history_, space_);
        auto model = trainer_->fit(data);
        TrainingEvent event;
        event.generation = generation;
        event.evaluations_before = state_.evaluations_performed;
        event.pair_count = data.size();
        event.produced_model = !model->degenerate();
        event.training_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

        model_ = event.produced_model ? std::move(model) : nullptr;
        state_.model_available = model_ != nullptr;
        state_.last_training_generation = generation;
        return event;
    }

    PolicyVerdict decide(const Solution& child, const Solution& parent1, const Solution& parent2) override {
        const auto d = gate(child, &parent1, &parent2, state_, model_.get(), space_, config_.decision_threshold);
        PolicyVerdict v;
        switch (d.verdict) {
        case Verdict::Evaluate: v.decision = Decision::Evaluated; break;
        case Verdict::Skip: v.decision = Decision::Skipped; break;
        case Verdict::WarmupEvaluate: v.decision = Decision::Warmup; break;
        }
        v.probability1 = d.probability1;
        v.probability2 = d.probability2;
        return v;
    }

    void on_evaluated(const Solution& solution) override {
        ++state_.evaluations_performed;
        if (solution.evaluated()) history_.push_back(solution);
    }

    Decision initial_decision() const override { return Decision::Warmup; }

private:
    const IeoConfig& config_;
    const ParameterSpace& space_;
    std::shared_ptr<const ClassifierTrainer> trainer_;
    GateState state_;
    std::shared_ptr<const DominanceModel> model_;
    std::vector<Solution> history_;
};

}  // namespace

RunTrace run_ieo(const IeoConfig& config, const FitnessFunction& fitness) {
    validate(config);
    IeoPolicy policy(config, fitness.space());
    return run_generational(config.ga, fitness, &policy);
}

}  // namespace ieo
