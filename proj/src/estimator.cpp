#include "ieo/estimator.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "ieo/dataset.hpp"
#include "ieo/random.hpp"

namespace ieo {

std::size_t TrainingSet::positives() const {
    return static_cast<std::size_t>(
        std::count_if(pairs.begin(), pairs.end(), [](const TrainingPair& p) { return p.label == 1; }));
}

double TrainingSet::label1_fraction() const {
    return pairs.empty() ? 0.0 : static_cast<double>(positives()) / static_cast<double>(pairs.size());
}

bool TrainingSet::has_both_labels() const {
    const auto pos = positives();
    return pos > 0 && pos < pairs.size();
}

std::shared_ptr<const DominanceModel> MajorityClassTrainer::fit(const TrainingSet& data) const {
    return std::make_shared<const ConstantModel>(data.label1_fraction() > 0.5 ? 1.0 : 0.0,
                                                 data.feature_count, !data.has_both_labels());
}

std::shared_ptr<const DominanceModel> ConstantTrainer::fit(const TrainingSet& data) const {
    return std::make_shared<const ConstantModel>(probability_, data.feature_count);
}

std::vector<double> pair_features(const Genome& first, const Genome& second, const ParameterSpace& space) {
    auto features = normalize_features(first, space);
    const auto tail = normalize_features(second, space);
    features.insert(features.end(), tail.begin(), tail.end());
    return features;
}

namespace {

void require_evaluated(std::span<const Solution> history) {
    for (const auto& s : history)
        if (!s.evaluated())
            throw ContractViolation("training history may only contain evaluated solutions (id " +
                                    std::to_string(s.id) + ")");
}

}  // namespace

TrainingSet build_parent_pairs_dataset(std::span<const Solution> history, const ParameterSpace& space) {
    require_evaluated(history);
    std::unordered_map<SolutionId, const Solution*> by_id;
    for (const auto& s : history) by_id.emplace(s.id, &s);

    TrainingSet data;
    data.feature_count = 2 * space.size();
    for (const auto& s : history) {
        if (!s.is_offspring()) continue;
        const auto p1 = by_id.find(*s.parent1);
        const auto p2 = by_id.find(*s.parent2);
        if (p1 == by_id.end() || p2 == by_id.end()) continue;
        for (const Solution* parent : {p1->second, p2->second}) {
            data.pairs.push_back({pair_features(s.genome, parent->genome, space),
                                  dominates(s.objectives, parent->objectives) ? 1 : 0});
        }
    }
    return data;
}

TrainingSet build_all_pairs_dataset(std::span<const Solution> history, const ParameterSpace& space) {
    require_evaluated(history);
    std::vector<const Solution*> sorted;
    sorted.reserve(history.size());
    for (const auto& s : history) sorted.push_back(&s);
    std::sort(sorted.begin(), sorted.end(), [](const Solution* a, const Solution* b) { return a->id < b->id; });

    std::vector<std::vector<double>> features;
    features.reserve(sorted.size());
    for (const auto* s : sorted) features.push_back(normalize_features(s->genome, space));

    TrainingSet data;
    data.feature_count = 2 * space.size();
    data.pairs.reserve(sorted.size() * (sorted.size() > 0 ? sorted.size() - 1 : 0) / 2);
    for (std::size_t a = 0; a < sorted.size(); ++a) {
        for (std::size_t b = a + 1; b < sorted.size(); ++b) {
            TrainingPair pair;
            pair.features.reserve(data.feature_count);
            pair.features.insert(pair.features.end(), features[a].begin(), features[a].end());
            pair.features.insert(pair.features.end(), features[b].begin(), features[b].end());
            pair.label = dominates(sorted[a]->objectives, sorted[b]->objectives) ? 1 : 0;
            data.pairs.push_back(std::move(pair));
        }
    }
    return data;
}

std::shared_ptr<const DominanceModel> train_model(std::span<const Solution> history,
                                                  const ParameterSpace& space,
                                                  const ClassifierTrainer& trainer) {
    return trainer.fit(build_parent_pairs_dataset(history, space));
}

bool predict(const DominanceModel& model, std::span<const double> features, double threshold) {
    if (features.size() != model.feature_count())
        throw ContractViolation("predict: expected " + std::to_string(model.feature_count()) +
                                " features, got " + std::to_string(features.size()));
    return model.predict_probability(features) >= threshold;
}

Estimate estimate(const Solution& child, const Solution* parent1, const Solution* parent2,
                  const DominanceModel& model, const ParameterSpace& space, double threshold) {
    Estimate out;
    if (parent1 == nullptr || parent2 == nullptr) return out;
    const auto f1 = pair_features(child.genome, parent1->genome, space);
    const auto f2 = pair_features(child.genome, parent2->genome, space);
    out.probability1 = model.predict_probability(f1);
    out.probability2 = model.predict_probability(f2);
    out.worth_evaluating = predict(model, f1, threshold) || predict(model, f2, threshold);
    return out;
}

// --- CSV --------------------------------------------------------------------

void write_training_set_csv(std::ostream& out, const TrainingSet& data) {
    for (std::size_t f = 0; f < data.feature_count; ++f) out << "f_" << f << ',';
    out << "label\n";
    char buf[32];
    for (const auto& pair : data.pairs) {
        for (double v : pair.features) {
            const auto res = std::to_chars(buf, buf + sizeof buf, v);
            out.write(buf, res.ptr - buf);
            out << ',';
        }
        out << pair.label << '\n';
    }
}

TrainingSet read_training_set_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("training set CSV is empty");
    const auto header = split_csv_line(line);
    if (header.empty() || header.back() != "label")
        throw std::invalid_argument("training set CSV must end with a 'label' column");
    TrainingSet data;
    data.feature_count = header.size() - 1;
    for (std::size_t f = 0; f < data.feature_count; ++f)
        if (header[f] != "f_" + std::to_string(f))
            throw std::invalid_argument("unexpected training set column '" + header[f] + "'");
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw std::invalid_argument("training set line " + std::to_string(line_number) +
                                        " has the wrong number of fields");
        TrainingPair pair;
        pair.features.resize(data.feature_count);
        for (std::size_t f = 0; f <= data.feature_count; ++f) {
            double v = 0.0;
            const auto& c = cells[f];
            const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
            if (ec != std::errc() || ptr != c.data() + c.size())
                throw std::invalid_argument("training set line " + std::to_string(line_number) +
                                            ": bad number '" + c + "'");
            if (f < data.feature_count)
                pair.features[f] = v;
            else if (v == 0.0 || v == 1.0)
                pair.label = static_cast<int>(v);
            else
                throw std::invalid_argument("training set line " + std::to_string(line_number) +
                                            ": label must be 0 or 1");
        }
        data.pairs.push_back(std::move(pair));
    }
    return data;
}

// --- offline evaluation -----------------------------------------------------

double accuracy(const DominanceModel& model, std::span<const TrainingPair> pairs, double threshold) {
    if (pairs.empty()) return 0.0;
    std::size_t correct = 0;
    for (const auto& p : pairs)
        if (predict(model, p.features, threshold) == (p.label == 1)) ++correct;
    return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

EstimatorEvalReport evaluate_estimator(std::span<const Solution> evaluated, const ParameterSpace& space,
                                       const EstimatorEvalOptions& options) {
    if (evaluated.size() < kMinEstimatorEvalSolutions)
        throw std::invalid_argument("estimator evaluation needs at least " +
                                    std::to_string(kMinEstimatorEvalSolutions) +
                                    " evaluated solutions, the trace has " +
                                    std::to_string(evaluated.size()));
    if (!(options.train_fraction > 0.0 && options.train_fraction < 1.0))
        throw std::invalid_argument("train fraction must lie strictly between 0 and 1");

    EstimatorEvalReport report;
    report.solutions = evaluated.size();
    TrainingSet all = build_all_pairs_dataset(evaluated, space);
    report.pairs = all.size();
    report.label1_fraction = all.label1_fraction();
    if (!all.has_both_labels())
        report.warnings.push_back("every pair carries the same label; accuracy figures are trivial");

    Rng rng(options.seed);
    for (std::size_t i = all.pairs.size(); i > 1; --i) std::swap(all.pairs[i - 1], all.pairs[rng.index(i)]);
    const auto n_train = std::clamp<std::size_t>(
        static_cast<std::size_t>(options.train_fraction * static_cast<double>(all.size())), 1, all.size() - 1);
    TrainingSet train;
    TrainingSet test;
    train.feature_count = test.feature_count = all.feature_count;
    train.pairs.assign(all.pairs.begin(), all.pairs.begin() + static_cast<std::ptrdiff_t>(n_train));
    test.pairs.assign(all.pairs.begin() + static_cast<std::ptrdiff_t>(n_train), all.pairs.end());
    report.train_pairs = train.size();
    report.test_pairs = test.size();

    const auto t0 = std::chrono::steady_clock::now();
    const auto model = GbtTrainer(options.gbt).fit(train);
    report.training_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    const auto baseline = MajorityClassTrainer().fit(train);

    report.model_train_accuracy = accuracy(*model, train.pairs);
    report.model_test_accuracy = accuracy(*model, test.pairs);
    report.baseline_train_accuracy = accuracy(*baseline, train.pairs);
    report.baseline_test_accuracy = accuracy(*baseline, test.pairs);
    if (model->degenerate()) report.warnings.push_back("training data held a single class; model is constant");
    return report;
}

}  // namespace ieo
