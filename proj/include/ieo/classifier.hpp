#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ieo {

/// One labeled comparison: features of the first solution followed by those
/// of the second; label 1 iff the first dominates the second.
struct TrainingPair {
    std::vector<double> features;
    int label = 0;

    bool operator==(const TrainingPair&) const = default;
};

struct TrainingSet {
    std::size_t feature_count = 0;  // 2n
    std::vector<TrainingPair> pairs;

    std::size_t size() const { return pairs.size(); }
    bool empty() const { return pairs.empty(); }
    std::size_t positives() const;
    /// Share of label-1 pairs; 0 for an empty set.
    double label1_fraction() const;
    bool has_both_labels() const;
};

/// A trained dominance predictor. Immutable; safe to query concurrently.
class DominanceModel {
public:
    virtual ~DominanceModel() = default;
    /// Probability in [0, 1] that the first half of `features` dominates the second.
    virtual double predict_probability(std::span<const double> features) const = 0;
    virtual std::size_t feature_count() const = 0;
    /// True when fitting saw a single class and fell back to a constant.
    virtual bool degenerate() const { return false; }
};

class ClassifierTrainer {
public:
    virtual ~ClassifierTrainer() = default;
    virtual std::shared_ptr<const DominanceModel> fit(const TrainingSet& data) const = 0;
    virtual std::string name() const = 0;
};

/// Same probability for every input.
class ConstantModel final : public DominanceModel {
public:
    ConstantModel(double probability, std::size_t feature_count, bool degenerate = false)
        : probability_(probability), feature_count_(feature_count), degenerate_(degenerate) {}

    double predict_probability(std::span<const double>) const override { return probability_; }
    std::size_t feature_count() const override { return feature_count_; }
    bool degenerate() const override { return degenerate_; }

private:
    double probability_;
    std::size_t feature_count_;
    bool degenerate_;
};

/// Predicts the training set's majority label.
class MajorityClassTrainer final : public ClassifierTrainer {
public:
    std::shared_ptr<const DominanceModel> fit(const TrainingSet& data) const override;
    std::string name() const override { return "majority-class"; }
};

/// Ignores the data and always answers `probability`.
class ConstantTrainer final : public ClassifierTrainer {
public:
    explicit ConstantTrainer(double probability) : probability_(probability) {}
    std::shared_ptr<const DominanceModel> fit(const TrainingSet& data) const override;
    std::string name() const override { return "constant"; }

private:
    double probability_;
};

}  // namespace ieo
