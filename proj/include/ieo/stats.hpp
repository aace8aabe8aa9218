#pragma once

/// @file stats.hpp
/// @brief Paired significance tests and the max-normalization used in reports.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ieo::stats {

/// Divides every value by `reference_max` (> 0, else std::invalid_argument).
/// No clamping: values above the reference map above 1.
std::vector<double> normalize_by_max(std::span<const double> values, double reference_max);

/// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> midranks(std::span<const double> values);

inline constexpr std::size_t kWilcoxonExactLimit = 12;
inline constexpr std::size_t kWilcoxonMinPairs = 5;

struct WilcoxonResult {
    double p_value = 1.0;
    double w_plus = 0.0;      // sum of ranks of positive differences
    std::size_t n = 0;        // pairs left after dropping zero differences
    bool exact = false;
};

/// Two-sided Wilcoxon signed-rank test on x - y. Zero differences are
/// dropped first. n <= 12: exact null distribution (conditional on tied
/// ranks); n > 12: normal approximation with tie correction and no
/// continuity correction. All-zero differences give p = 1.
/// Throws std::invalid_argument for unequal lengths or 1..4 non-zero pairs.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y);

struct TTestResult {
    double p_value = 1.0;
    double t = 0.0;
    double df = 0.0;
};

/// Two-sided paired Student t-test on x - y with n - 1 degrees of freedom.
/// Zero variance of the differences: p = 1 when the mean difference is 0,
/// p = 0 otherwise (t reported as +-infinity).
/// Throws std::invalid_argument for unequal lengths or n < 2.
TTestResult paired_t_test(std::span<const double> x, std::span<const double> y);

/// Two-sided p-value of a Student t statistic.
double student_t_two_sided(double t, double df);

}  // namespace ieo::stats
