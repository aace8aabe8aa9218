#include "ieo/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ieo/core.hpp"

namespace ieo {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double log_loss(std::span<const double> raw, std::span<const int> labels) {
    // log(1 + exp(-s)) for y = 1, log(1 + exp(s)) for y = 0, computed stably.
    double total = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double s = labels[i] == 1 ? -raw[i] : raw[i];
        total += s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
    }
    return raw.empty() ? 0.0 : total / static_cast<double>(raw.size());
}

void validate(const GbtParams& params) {
    if (params.n_trees == 0) throw std::invalid_argument("estimator.n_trees must be positive");
    if (params.max_depth == 0) throw std::invalid_argument("estimator.max_depth must be positive");
    if (!(params.learning_rate > 0.0)) throw std::invalid_argument("estimator.learning_rate must be positive");
    if (!(params.l2 >= 0.0)) throw std::invalid_argument("estimator.l2 must be non-negative");
    if (params.min_samples_leaf == 0) throw std::invalid_argument("estimator.min_samples_leaf must be positive");
}

// --- tree -------------------------------------------------------------------

double RegressionTree::predict(std::span<const double> x) const {
    std::size_t k = 0;
    while (!nodes_[k].is_leaf()) {
        const auto& n = nodes_[k];
        k = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes_[k].value;
}

std::size_t RegressionTree::depth() const {
    if (nodes_.empty()) return 0;
    std::vector<std::size_t> level(nodes_.size(), 0);
    std::size_t deepest = 0;
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
        deepest = std::max(deepest, level[k]);
        if (!nodes_[k].is_leaf()) {
            level[static_cast<std::size_t>(nodes_[k].left)] = level[k] + 1;
            level[static_cast<std::size_t>(nodes_[k].right)] = level[k] + 1;
        }
    }
    return deepest;
}

// --- model ------------------------------------------------------------------

GbtModel::GbtModel(std::vector<RegressionTree> trees, double base_score, GbtParams params,
                   std::size_t feature_count, bool degenerate)
    : trees_(std::move(trees)),
      base_score_(base_score),
      params_(params),
      feature_count_(feature_count),
      degenerate_(degenerate) {}

double GbtModel::raw_score(std::span<const double> features) const {
    if (features.size() != feature_count_)
        throw ContractViolation("model expects " + std::to_string(feature_count_) + " features, got " +
                                std::to_string(features.size()));
    double sum = 0.0;
    for (const auto& t : trees_) sum += t.predict(features);
    return base_score_ + params_.learning_rate * sum;
}

double GbtModel::predict_probability(std::span<const double> features) const {
    return sigmoid(raw_score(features));
}

namespace {

nlohmann::json node_to_json(std::span<const TreeNode> nodes, std::size_t k) {
    const auto& n = nodes[k];
    if (n.is_leaf()) return {{"leaf", n.value}};
    return {{"feature", n.feature},
            {"threshold", n.threshold},
            {"left", node_to_json(nodes, static_cast<std::size_t>(n.left))},
            {"right", node_to_json(nodes, static_cast<std::size_t>(n.right))}};
}

int node_from_json(const nlohmann::json& j, std::vector<TreeNode>& nodes, std::size_t feature_count) {
    const int index = static_cast<int>(nodes.size());
    nodes.emplace_back();
    if (j.contains("leaf")) {
        nodes[static_cast<std::size_t>(index)].value = j.at("leaf").get<double>();
        return index;
    }
    const int feature = j.at("feature").get<int>();
    if (feature < 0 || static_cast<std::size_t>(feature) >= feature_count)
        throw std::invalid_argument("model split feature out of range");
    const double threshold = j.at("threshold").get<double>();
    const int left = node_from_json(j.at("left"), nodes, feature_count);
    const int right = node_from_json(j.at("right"), nodes, feature_count);
    auto& n = nodes[static_cast<std::size_t>(index)];
    n.feature = feature;
    n.threshold = threshold;
    n.left = left;
    n.right = right;
    return index;
}

}  // namespace

nlohmann::json GbtModel::to_json() const {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : trees_) trees.push_back(node_to_json(t.nodes(), 0));
    return {{"format", "ieo-gbt"},
            {"version", kGbtModelFormatVersion},
            {"base_score", base_score_},
            {"learning_rate", params_.learning_rate},
            {"max_depth", params_.max_depth},
            {"n_trees", params_.n_trees},
            {"l2", params_.l2},
            {"feature_count", feature_count_},
            {"degenerate", degenerate_},
            {"trees", trees}};
}

GbtModel GbtModel::from_json(const nlohmann::json& doc) {
    if (doc.value("format", "") != "ieo-gbt")
        throw std::invalid_argument("not a gradient-boosted-trees model document");
    const int version = doc.at("version").get<int>();
    if (version != kGbtModelFormatVersion)
        throw std::invalid_argument("model format version " + std::to_string(version) +
                                    " is not supported (expected " +
                                    std::to_string(kGbtModelFormatVersion) + ")");
    GbtParams params;
    params.learning_rate = doc.at("learning_rate").get<double>();
    params.max_depth = doc.at("max_depth").get<std::size_t>();
    params.n_trees = doc.at("n_trees").get<std::size_t>();
    params.l2 = doc.at("l2").get<double>();
    const auto feature_count = doc.at("feature_count").get<std::size_t>();
    std::vector<RegressionTree> trees;
    for (const auto& t : doc.at("trees")) {
        std::vector<TreeNode> nodes;
        node_from_json(t, nodes, feature_count);
        trees.emplace_back(std::move(nodes));
    }
    return GbtModel(std::move(trees), doc.at("base_score").get<double>(), params, feature_count,
                    doc.at("degenerate").get<bool>());
}

// --- training ---------------------------------------------------------------

namespace {

struct SplitCandidate {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
};

/// Grows one tree on gradients `grad` (hessians `hess`) and returns it along
/// with the leaf index of every sample.
class TreeBuilder {
public:
    TreeBuilder(const std::vector<std::vector<double>>& columns,
                const std::vector<std::vector<std::size_t>>& order, const GbtParams& params)
        : columns_(columns), order_(order), params_(params) {}

    RegressionTree build(std::span<const double> grad, std::span<const double> hess,
                         std::vector<int>& node_of) const {
        const std::size_t n = grad.size();
        std::vector<TreeNode> nodes(1);
        node_of.assign(n, 0);
        std::vector<int> active{0};

        for (std::size_t depth = 0; depth < params_.max_depth && !active.empty(); ++depth) {
            // slot[k] = position of node k in `active`, or -1.
            std::vector<int> slot(nodes.size(), -1);
            for (std::size_t a = 0; a < active.size(); ++a) slot[static_cast<std::size_t>(active[a])] = static_cast<int>(a);

            std::vector<double> total_sum(active.size(), 0.0);
            std::vector<std::size_t> total_count(active.size(), 0);
            for (std::size_t i = 0; i < n; ++i) {
                const int s = slot[static_cast<std::size_t>(node_of[i])];
                if (s < 0) continue;
                total_sum[static_cast<std::size_t>(s)] += grad[i];
                ++total_count[static_cast<std::size_t>(s)];
            }

            std::vector<SplitCandidate> best(active.size());
            std::vector<double> left_sum(active.size());
            std::vector<std::size_t> left_count(active.size());
            std::vector<double> last_value(active.size());
            for (std::size_t f = 0; f < columns_.size(); ++f) {
                std::fill(left_sum.begin(), left_sum.end(), 0.0);
                std::fill(left_count.begin(), left_count.end(), 0);
                const auto& column = columns_[f];
                for (std::size_t i : order_[f]) {
                    const int s_signed = slot[static_cast<std::size_t>(node_of[i])];
                    if (s_signed < 0) continue;
                    const auto s = static_cast<std::size_t>(s_signed);
                    const double v = column[i];
                    const std::size_t nl = left_count[s];
                    const std::size_t nr = total_count[s] - nl;
                    if (nl >= params_.min_samples_leaf && nr >= params_.min_samples_leaf &&
                        v > last_value[s]) {
                        const double sl = left_sum[s];
                        const double sr = total_sum[s] - sl;
                        const double gain = sl * sl / static_cast<double>(nl) +
                                            sr * sr / static_cast<double>(nr) -
                                            total_sum[s] * total_sum[s] /
                                                static_cast<double>(total_count[s]);
                        if (gain > best[s].gain) {
                            double threshold = 0.5 * (last_value[s] + v);
                            if (!(threshold < v)) threshold = last_value[s];
                            best[s] = {gain, static_cast<int>(f), threshold};
                        }
                    }
                    left_sum[s] += grad[i];
                    ++left_count[s];
                    last_value[s] = v;
                }
            }

            std::vector<int> next;
            for (std::size_t a = 0; a < active.size(); ++a) {
                if (best[a].feature < 0 || !(best[a].gain > 1e-12)) continue;
                const auto k = static_cast<std::size_t>(active[a]);
                const int left = static_cast<int>(nodes.size());
                nodes.emplace_back();
                nodes.emplace_back();
                nodes[k].feature = best[a].feature;
                nodes[k].threshold = best[a].threshold;
                nodes[k].left = left;
                nodes[k].right = left + 1;
                next.push_back(left);
                next.push_back(left + 1);
            }
            for (std::size_t i = 0; i < n; ++i) {
                const auto& node = nodes[static_cast<std::size_t>(node_of[i])];
                if (node.is_leaf()) continue;
                node_of[i] = columns_[static_cast<std::size_t>(node.feature)][i] <= node.threshold
                                 ? node.left
                                 : node.right;
            }
            active = std::move(next);
        }

        std::vector<double> g_sum(nodes.size(), 0.0);
        std::vector<double> h_sum(nodes.size(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            g_sum[static_cast<std::size_t>(node_of[i])] += grad[i];
            h_sum[static_cast<std::size_t>(node_of[i])] += hess[i];
        }
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            if (!nodes[k].is_leaf()) continue;
            const double denom = h_sum[k] + params_.l2;
            nodes[k].value = denom > 0.0 ? g_sum[k] / denom : 0.0;
        }
        return RegressionTree(std::move(nodes));
    }

private:
    const std::vector<std::vector<double>>& columns_;
    const std::vector<std::vector<std::size_t>>& order_;
    const GbtParams& params_;
};

}  // namespace

GbtTrainer::GbtTrainer(GbtParams params) : params_(params) { validate(params_); }

GbtModel GbtTrainer::train(const TrainingSet& data) const {
    const std::size_t n = data.size();
    const std::size_t width = data.feature_count;
    const std::size_t positives = data.positives();
    if (n == 0 || positives == 0 || positives == n) {
        // Single-class data: the prior alone, flagged degenerate.
        const double p = n == 0 ? 0.5 : std::clamp(static_cast<double>(positives) / static_cast<double>(n), 1e-6, 1.0 - 1e-6);
        return GbtModel({}, std::log(p / (1.0 - p)), params_, width, true);
    }

    std::vector<std::vector<double>> columns(width, std::vector<double>(n));
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& pair = data.pairs[i];
        if (pair.features.size() != width)
            throw ContractViolation("training pair " + std::to_string(i) + " has " +
                                    std::to_string(pair.features.size()) + " features, expected " +
                                    std::to_string(width));
        if (pair.label != 0 && pair.label != 1) throw ContractViolation("training labels must be 0 or 1");
        for (std::size_t f = 0; f < width; ++f) columns[f][i] = pair.features[f];
        labels[i] = pair.label;
    }
    std::vector<std::vector<std::size_t>> order(width, std::vector<std::size_t>(n));
    for (std::size_t f = 0; f < width; ++f) {
        std::iota(order[f].begin(), order[f].end(), std::size_t{0});
        std::stable_sort(order[f].begin(), order[f].end(),
                         [&c = columns[f]](std::size_t a, std::size_t b) { return c[a] < c[b]; });
    }

    const double prior = static_cast<double>(positives) / static_cast<double>(n);
    const double base = std::log(prior / (1.0 - prior));
    std::vector<double> raw(n, base);
    std::vector<double> grad(n);
    std::vector<double> hess(n);
    std::vector<double> candidate(n);
    std::vector<int> node_of;
    std::vector<double> losses{log_loss(raw, labels)};
    std::vector<RegressionTree> trees;
    trees.reserve(params_.n_trees);
    const TreeBuilder builder(columns, order, params_);

    for (std::size_t round = 0; round < params_.n_trees; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            const double p = sigmoid(raw[i]);
            grad[i] = static_cast<double>(labels[i]) - p;
            hess[i] = p * (1.0 - p);
        }
        RegressionTree tree = builder.build(grad, hess, node_of);

        // Step halving keeps the training loss from ever rising.
        double loss = 0.0;
        for (int attempt = 0; attempt <= 30; ++attempt) {
            const auto nodes = tree.nodes();
            for (std::size_t i = 0; i < n; ++i)
                candidate[i] = raw[i] + params_.learning_rate * nodes[static_cast<std::size_t>(node_of[i])].value;
            loss = log_loss(candidate, labels);
            if (loss <= losses.back()) break;
            for (auto& node : tree.mutable_nodes()) node.value *= attempt < 30 ? 0.5 : 0.0;
            if (attempt == 30) {
                candidate = raw;
                loss = losses.back();
            }
        }
        raw.swap(candidate);
        losses.push_back(loss);
        trees.push_back(std::move(tree));
    }

    GbtModel model(std::move(trees), base, params_, width, false);
    model.set_training_loss(std::move(losses));
    return model;
}

std::shared_ptr<const DominanceModel> GbtTrainer::fit(const TrainingSet& data) const {
    return std::make_shared<const GbtModel>(train(data));
}

}  // namespace ieo
