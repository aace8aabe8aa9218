#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "ieo/random.hpp"
#include "ieo/stats.hpp"

using namespace ieo;
using namespace ieo::stats;

namespace {

// Two-sided p-value by enumerating every sign assignment of the midranks.
double enumerate_p(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> d;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] != y[i]) d.push_back(x[i] - y[i]);
    std::vector<double> mags;
    for (double v : d) mags.push_back(std::abs(v));
    const auto ranks = midranks(mags);
    double w = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d[i] > 0) w += ranks[i];
    const std::size_t n = d.size();
    std::size_t below = 0, above = 0;
    const std::size_t total = std::size_t{1} << n;
    for (std::size_t mask = 0; mask < total; ++mask) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask >> i & 1) s += ranks[i];
        if (s <= w + 1e-9) ++below;
        if (s >= w - 1e-9) ++above;
    }
    const double p = 2.0 * static_cast<double>(std::min(below, above)) / static_cast<double>(total);
    return std::min(1.0, p);
}

}  // namespace

TEST_CASE("normalize_by_max") {
    const std::vector<double> v{2.0, 4.0};
    CHECK(normalize_by_max(v, 4.0) == std::vector<double>{0.5, 1.0});
    const std::vector<double> one{3.0};
    CHECK(normalize_by_max(one, 3.0) == std::vector<double>{1.0});
    const std::vector<double> above{5.0};
    CHECK(normalize_by_max(above, 4.0)[0] > 1.0);
    CHECK_THROWS_AS(normalize_by_max(v, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(normalize_by_max(v, -1.0), std::invalid_argument);
}

TEST_CASE("midranks share tied positions") {
    const std::vector<double> v{10.0, 20.0, 10.0, 30.0};
    CHECK(midranks(v) == std::vector<double>{1.5, 3.0, 1.5, 4.0});
}

TEST_CASE("Wilcoxon conventions and small cases") {
    const std::vector<double> x{1, 2, 3, 4, 5, 6};
    CHECK(wilcoxon_signed_rank(x, x).p_value == 1.0);

    const std::vector<double> zeros(6, 0.0);
    const auto r = wilcoxon_signed_rank(x, zeros);
    CHECK(r.exact);
    CHECK(r.n == 6);
    CHECK(r.w_plus == 21.0);
    CHECK(r.p_value == doctest::Approx(2.0 / 64.0).epsilon(1e-15));

    const std::vector<double> a{1, 2, 3};
    const std::vector<double> b{0, 0, 0};
    CHECK_THROWS_AS(wilcoxon_signed_rank(a, b), std::invalid_argument);
    const std::vector<double> shorter{1, 2};
    CHECK_THROWS_AS(wilcoxon_signed_rank(a, shorter), std::invalid_argument);
}

TEST_CASE("exact Wilcoxon equals brute-force enumeration for n <= 10") {
    Rng rng(31);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 5 + rng.index(6);
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            // Coarse values give ties among |d| and some zero differences.
            x[i] = static_cast<double>(rng.index(7));
            y[i] = static_cast<double>(rng.index(7));
        }
        std::size_t nonzero = 0;
        for (std::size_t i = 0; i < n; ++i) nonzero += x[i] != y[i];
        if (nonzero < kWilcoxonMinPairs) continue;
        const auto r = wilcoxon_signed_rank(x, y);
        CHECK(r.exact);
        CHECK(r.p_value == doctest::Approx(enumerate_p(x, y)).epsilon(1e-12));
    }
}

TEST_CASE("normal approximation for larger samples") {
    // Reference value from scipy.stats.wilcoxon(x, y, correction=False, method="approx").
    const std::vector<double> x{2.1, 3.4, 1.9, 5.0, 4.2, 3.3, 2.8, 1.1, 0.4, 7.7, 3.9, 2.2, 6.1, 5.5, 4.4};
    const std::vector<double> y{1.8, 3.0, 2.2, 4.1, 3.9, 3.5, 2.0, 1.5, 0.1, 7.0, 3.0, 2.9, 5.0, 5.1, 4.6};
    const auto r = wilcoxon_signed_rank(x, y);
    CHECK_FALSE(r.exact);
    CHECK(r.n == 15);
    CHECK(r.p_value == doctest::Approx(0.053329978635977236).epsilon(1e-9));
}

TEST_CASE("paired t-test") {
    const std::vector<double> x{1, 2, 3, 4};
    CHECK(paired_t_test(x, x).p_value == 1.0);

    // Differences [1,1,1,1,-1]: mean 0.6, sd sqrt(0.8), t = 0.6 / (sqrt(0.8)/sqrt(5)) = 1.5.
    // Two-sided p for t = 1.5 on 4 degrees of freedom is 0.208 exactly.
    const std::vector<double> a{1, 1, 1, 1, 0};
    const std::vector<double> b{0, 0, 0, 0, 1};
    const auto r = paired_t_test(a, b);
    CHECK(r.t == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(r.df == 4.0);
    CHECK(r.p_value == doctest::Approx(0.208).epsilon(1e-12));

    const std::vector<double> c{2.1, 3.4, 1.9, 5.0, 4.2, 3.3, 2.8};
    const std::vector<double> d{1.8, 3.0, 2.2, 4.1, 3.9, 3.5, 2.0};
    const auto s = paired_t_test(c, d);
    CHECK(s.t == doctest::Approx(1.8375919530860247).epsilon(1e-12));
    CHECK(s.p_value == doctest::Approx(0.11576382999147901).epsilon(1e-10));

    CHECK(student_t_two_sided(0.0, 7.0) == 1.0);

    const std::vector<double> shifted{2, 3, 4, 5};
    const auto constant = paired_t_test(shifted, x);
    CHECK(constant.p_value == 0.0);
    CHECK(std::isinf(constant.t));

    const std::vector<double> one{1.0};
    CHECK_THROWS_AS(paired_t_test(one, one), std::invalid_argument);
}
