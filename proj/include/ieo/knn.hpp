#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ieo {

/// Brute-force k-nearest-neighbours over a dense feature matrix.
class KnnClassifier {
public:
    struct Options {
        std::size_t k = 5;
        bool inverse_distance = false;
        double p = 2.0;  // Minkowski exponent
    };

    /// Copies `rows` rows of `cols` features plus their labels (0..classes-1).
    KnnClassifier(std::span<const double> features, std::size_t cols, std::span<const int> labels,
                  std::size_t classes);

    /// Ties in distance go to the lower training index; ties in votes go to
    /// the lower class label.
    int predict(std::span<const double> query, const Options& options) const;

    std::size_t size() const { return labels_.size(); }

private:
    std::vector<double> features_;
    std::size_t cols_;
    std::vector<int> labels_;
    std::size_t classes_;
};

double minkowski_distance(std::span<const double> a, std::span<const double> b, double p);

}  // namespace ieo
