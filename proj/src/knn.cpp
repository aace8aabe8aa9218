#include "ieo/knn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace ieo {

double minkowski_distance(std::span<const double> a, std::span<const double> b, double p) {
    double acc = 0.0;
    if (p == 2.0) {
        for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
        return std::sqrt(acc);
    }
    if (p == 1.0) {
        for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
        return acc;
    }
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::pow(std::abs(a[i] - b[i]), p);
    return std::pow(acc, 1.0 / p);
}

KnnClassifier::KnnClassifier(std::span<const double> features, std::size_t cols,
                             std::span<const int> labels, std::size_t classes)
    : features_(features.begin(), features.end()),
      cols_(cols),
      labels_(labels.begin(), labels.end()),
      classes_(classes) {
    if (cols_ == 0 || features_.size() != labels_.size() * cols_)
        throw std::invalid_argument("k-NN feature matrix does not match label count");
    if (labels_.empty()) throw std::invalid_argument("k-NN needs at least one training row");
}

int KnnClassifier::predict(std::span<const double> query, const Options& options) const {
    const std::size_t k = std::clamp<std::size_t>(options.k, 1, labels_.size());
    std::vector<std::pair<double, std::size_t>> dist(labels_.size());
    for (std::size_t i = 0; i < labels_.size(); ++i)
        dist[i] = {minkowski_distance(query, {features_.data() + i * cols_, cols_}, options.p), i};
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());

    std::vector<double> votes(classes_, 0.0);
    if (options.inverse_distance) {
        // Exact matches outvote everything else.
        const bool exact = dist[0].first == 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            if (exact) {
                if (dist[j].first == 0.0) votes[labels_[dist[j].second]] += 1.0;
            } else {
                votes[labels_[dist[j].second]] += 1.0 / dist[j].first;
            }
        }
    } else {
        for (std::size_t j = 0; j < k; ++j) votes[labels_[dist[j].second]] += 1.0;
    }
    return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

}  // namespace ieo
