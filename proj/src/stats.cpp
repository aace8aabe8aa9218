#include "ieo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/beta.hpp>

namespace ieo::stats {

std::vector<double> normalize_by_max(std::span<const double> values, double reference_max) {
    if (!(reference_max > 0.0)) throw std::invalid_argument("normalization reference must be positive");
    std::vector<double> out(values.begin(), values.end());
    for (auto& v : out) v /= reference_max;
    return out;
}

std::vector<double> midranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

namespace {

/// Exact two-sided p for W+ given (possibly tied) ranks. Ranks are
/// multiples of 1/2, so doubled ranks are integers and the null
/// distribution of 2W+ is a subset-sum count over 2^n equally likely signs.
double exact_signed_rank_p(std::span<const double> ranks, double w_plus) {
    std::vector<long> doubled;
    long total = 0;
    for (double r : ranks) {
        doubled.push_back(std::lround(2.0 * r));
        total += doubled.back();
    }
    std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
    count[0] = 1.0;
    long reach = 0;
    for (long r : doubled) {
        reach += r;
        for (long s = reach; s >= r; --s) count[static_cast<std::size_t>(s)] += count[static_cast<std::size_t>(s - r)];
    }
    const long observed = std::lround(2.0 * w_plus);
    double below = 0.0;
    double above = 0.0;
    for (long s = 0; s <= total; ++s) {
        if (s <= observed) below += count[static_cast<std::size_t>(s)];
        if (s >= observed) above += count[static_cast<std::size_t>(s)];
    }
    const double all = std::ldexp(1.0, static_cast<int>(ranks.size()));
    return std::min(1.0, 2.0 * std::min(below, above) / all);
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("wilcoxon: samples differ in length");
    std::vector<double> diff;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] - y[i] != 0.0) diff.push_back(x[i] - y[i]);

    WilcoxonResult result;
    result.n = diff.size();
    if (diff.empty()) return result;
    if (diff.size() < kWilcoxonMinPairs)
        throw std::invalid_argument("wilcoxon: need at least " + std::to_string(kWilcoxonMinPairs) +
                                    " non-zero differences, got " + std::to_string(diff.size()));

    std::vector<double> magnitude(diff.size());
    std::transform(diff.begin(), diff.end(), magnitude.begin(), [](double d) { return std::abs(d); });
    const auto ranks = midranks(magnitude);
    for (std::size_t i = 0; i < diff.size(); ++i)
        if (diff[i] > 0.0) result.w_plus += ranks[i];

    const double n = static_cast<double>(diff.size());
    if (diff.size() <= kWilcoxonExactLimit) {
        result.exact = true;
        result.p_value = exact_signed_rank_p(ranks, result.w_plus);
        return result;
    }

    // Tie correction: subtract sum(t^3 - t) / 48 for every group of t ties.
    std::vector<double> sorted(magnitude);
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }
    const double mean = n * (n + 1.0) / 4.0;
    const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if (!(var > 0.0)) return result;
    const double z = (result.w_plus - mean) / std::sqrt(var);
    result.p_value = std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
    return result;
}

double student_t_two_sided(double t, double df) {
    if (std::isinf(t)) return 0.0;
    if (t == 0.0) return 1.0;
    return boost::math::ibeta(0.5 * df, 0.5, df / (df + t * t));
}

TTestResult paired_t_test(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("t-test: samples differ in length");
    if (x.size() < 2) throw std::invalid_argument("t-test: need at least 2 pairs");
    const double n = static_cast<double>(x.size());
    double mean = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) mean += x[i] - y[i];
    mean /= n;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i] - mean;
        ss += d * d;
    }
    TTestResult r;
    r.df = n - 1.0;
    const double sd = std::sqrt(ss / (n - 1.0));
    if (sd == 0.0) {
        r.t = mean == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), mean);
        r.p_value = mean == 0.0 ? 1.0 : 0.0;
        return r;
    }
    r.t = mean / (sd / std::sqrt(n));
    r.p_value = student_t_two_sided(r.t, r.df);
    return r;
}

}  // namespace ieo::stats
