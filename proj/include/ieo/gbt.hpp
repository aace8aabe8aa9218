#pragma once

/// @file gbt.hpp
/// @brief Gradient-boosted regression trees with a logistic link.
///
/// Each round fits a depth-limited regression tree to the negative gradient
/// of the log-loss (y - p) using greedy squared-error splits. Leaf values are
/// one Newton step, sum(y - p) / (sum(p(1 - p)) + l2), and the model output
/// is sigmoid(base_score + learning_rate * sum of leaf values).
///
/// Split search is exact: every feature is pre-sorted once per fit and each
/// level of a tree is grown in a single pass over the sorted order. Ties in
/// gain keep the lowest feature index, then the lowest threshold, so fitting
/// is fully deterministic.

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <json.hpp>

#include "ieo/classifier.hpp"

namespace ieo {

struct GbtParams {
    std::size_t n_trees = 100;
    std::size_t max_depth = 3;
    double learning_rate = 0.1;
    double l2 = 1.0;
    std::size_t min_samples_leaf = 1;
};

void validate(const GbtParams& params);

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;  // go left when x[feature] <= threshold
    int left = -1;
    int right = -1;
    double value = 0.0;

    bool is_leaf() const { return feature < 0; }
};

class RegressionTree {
public:
    RegressionTree() = default;
    explicit RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

    double predict(std::span<const double> x) const;
    std::size_t depth() const;
    std::span<const TreeNode> nodes() const { return nodes_; }
    std::vector<TreeNode>& mutable_nodes() { return nodes_; }

private:
    std::vector<TreeNode> nodes_;
};

class GbtModel final : public DominanceModel {
public:
    GbtModel(std::vector<RegressionTree> trees, double base_score, GbtParams params,
             std::size_t feature_count, bool degenerate);

    double predict_probability(std::span<const double> features) const override;
    double raw_score(std::span<const double> features) const;
    std::size_t feature_count() const override { return feature_count_; }
    bool degenerate() const override { return degenerate_; }

    double base_score() const { return base_score_; }
    const GbtParams& params() const { return params_; }
    std::span<const RegressionTree> trees() const { return trees_; }

    /// Mean log-loss on the training set after the prior and after each round.
    std::span<const double> training_loss() const { return training_loss_; }
    void set_training_loss(std::vector<double> loss) { training_loss_ = std::move(loss); }

    /// Versioned document; trees are nested {feature, threshold, left, right}
    /// or {leaf} objects.
    nlohmann::json to_json() const;
    static GbtModel from_json(const nlohmann::json& doc);

private:
    std::vector<RegressionTree> trees_;
    double base_score_;
    GbtParams params_;
    std::size_t feature_count_;
    bool degenerate_;
    std::vector<double> training_loss_;
};

inline constexpr int kGbtModelFormatVersion = 1;

class GbtTrainer final : public ClassifierTrainer {
public:
    explicit GbtTrainer(GbtParams params = {});

    std::shared_ptr<const DominanceModel> fit(const TrainingSet& data) const override;
    std::string name() const override { return "gradient-boosted-trees"; }

    /// Same as fit() with the concrete type.
    GbtModel train(const TrainingSet& data) const;

private:
    GbtParams params_;
};

double sigmoid(double z);
/// Mean logistic loss of raw scores against 0/1 labels.
double log_loss(std::span<const double> raw, std::span<const int> labels);

}  // namespace ieo
