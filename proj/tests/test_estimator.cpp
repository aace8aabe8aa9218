#include <doctest.h>

#include <sstream>

#include "ieo/estimator.hpp"
#include "ieo/gbt.hpp"

using namespace ieo;

namespace {

const ParameterSpace kSpace({ParameterSpec::continuous("a", 0.0, 10.0), ParameterSpec::continuous("b", -1.0, 1.0)});

Solution make(SolutionId id, std::vector<double> genes, double value, std::optional<SolutionId> p1 = std::nullopt,
              std::optional<SolutionId> p2 = std::nullopt, Direction d = Direction::Maximize) {
    Solution s;
    s.id = id;
    s.genome = Genome{std::move(genes)};
    s.state = ObjectiveState::Evaluated;
    s.objectives = ObjectiveVector({value}, {d});
    s.parent1 = p1;
    s.parent2 = p2;
    return s;
}

std::vector<Solution> random_history(std::size_t k, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Solution> out;
    for (std::size_t i = 0; i < k; ++i) {
        auto g = sample_uniform(kSpace, rng);
        // A coarse objective so equal values occur.
        const double v = std::round(4.0 * rng.uniform01());
        out.push_back(make(i, g.values, v));
    }
    return out;
}

/// Returns `p_first` when feature 0 is below 0.5, else `p_second`.
class SplitModel final : public DominanceModel {
public:
    SplitModel(double p_first, double p_second) : a_(p_first), b_(p_second) {}
    double predict_probability(std::span<const double> f) const override { return f[2] < 0.5 ? a_ : b_; }
    std::size_t feature_count() const override { return 4; }

private:
    double a_, b_;
};

}  // namespace

TEST_CASE("pair features are the two normalized genomes") {
    const auto f = pair_features(Genome{{5.0, 1.0}}, Genome{{0.0, -1.0}}, kSpace);
    CHECK(f == std::vector<double>{0.5, 1.0, 0.0, 0.0});
}

TEST_CASE("parent-pair dataset") {
    SUBCASE("initial population only") {
        const std::vector<Solution> h{make(0, {1, 0}, 1.0), make(1, {2, 0}, 2.0)};
        CHECK(build_parent_pairs_dataset(h, kSpace).empty());
    }
    SUBCASE("labels against each parent") {
        const std::vector<Solution> h{make(0, {1, 0}, 0.8), make(1, {2, 0}, 0.95), make(2, {3, 0}, 0.9, 0, 1)};
        const auto data = build_parent_pairs_dataset(h, kSpace);
        REQUIRE(data.size() == 2);
        CHECK(data.feature_count == 4);
        CHECK(data.pairs[0].label == 1);
        CHECK(data.pairs[1].label == 0);
        CHECK(data.pairs[0].features == pair_features(h[2].genome, h[0].genome, kSpace));
        CHECK(data.pairs[1].features == pair_features(h[2].genome, h[1].genome, kSpace));
    }
    SUBCASE("two pairs per offspring") {
        const std::vector<Solution> h{make(0, {1, 0}, 0.1), make(1, {2, 0}, 0.2), make(2, {3, 0}, 0.3, 0, 1),
                                      make(3, {4, 0}, 0.4, 1, 0), make(4, {5, 0}, 0.5, 2, 3)};
        CHECK(build_parent_pairs_dataset(h, kSpace).size() == 6);
    }
    SUBCASE("offspring of a missing parent are skipped") {
        const std::vector<Solution> h{make(0, {1, 0}, 0.1), make(5, {3, 0}, 0.3, 0, 4)};
        CHECK(build_parent_pairs_dataset(h, kSpace).empty());
    }
    SUBCASE("non-evaluated history is rejected") {
        std::vector<Solution> h{make(0, {1, 0}, 0.1)};
        h[0].state = ObjectiveState::Null;
        CHECK_THROWS_AS(build_parent_pairs_dataset(h, kSpace), ContractViolation);
    }
}

TEST_CASE("all-pairs dataset") {
    CHECK(build_all_pairs_dataset(random_history(2, 1), kSpace).size() == 1);
    CHECK(build_all_pairs_dataset(random_history(10, 1), kSpace).size() == 45);

    std::vector<Solution> same;
    for (SolutionId i = 0; i < 8; ++i) same.push_back(make(i, {double(i), 0.0}, 0.5));
    const auto flat = build_all_pairs_dataset(same, kSpace);
    CHECK(flat.positives() == 0);
    CHECK(flat.label1_fraction() == 0.0);
}

TEST_CASE("all-pairs count law for k = 2..200") {
    const auto pool = random_history(200, 2);
    for (std::size_t k = 2; k <= 200; ++k) {
        const std::span<const Solution> h(pool.data(), k);
        REQUIRE(build_all_pairs_dataset(h, kSpace).size() == k * (k - 1) / 2);
    }
}

TEST_CASE("all-pairs labels match brute-force dominance, lower id first") {
    auto h = random_history(40, 3);
    std::reverse(h.begin(), h.end());
    const auto data = build_all_pairs_dataset(h, kSpace);
    std::vector<const Solution*> by_id(40);
    for (const auto& s : h) by_id[s.id] = &s;
    std::size_t i = 0;
    for (std::size_t a = 0; a < 40; ++a)
        for (std::size_t b = a + 1; b < 40; ++b, ++i) {
            const double va = by_id[a]->objectives.values[0];
            const double vb = by_id[b]->objectives.values[0];
            CHECK(data.pairs[i].label == (va > vb ? 1 : 0));
            CHECK(data.pairs[i].features == pair_features(by_id[a]->genome, by_id[b]->genome, kSpace));
        }
}

TEST_CASE("predict") {
    const ConstantModel prior(0.64, 4);
    const std::vector<double> f{0.1, 0.2, 0.3, 0.4};
    CHECK(predict(prior, f));
    CHECK(predict(ConstantModel(0.5, 4), f));
    CHECK_FALSE(predict(ConstantModel(0.4999, 4), f));
    CHECK_FALSE(predict(prior, f, 0.7));
    const std::vector<double> wrong{0.1, 0.2};
    CHECK_THROWS_AS(predict(prior, wrong), ContractViolation);
}

TEST_CASE("predict returns the label of memorized training pairs") {
    TrainingSet data;
    data.feature_count = 4;
    Rng rng(4);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> x(4);
        for (auto& v : x) v = rng.uniform01();
        data.pairs.push_back({x, x[0] > x[2] ? 1 : 0});
    }
    const auto model = GbtTrainer().train(data);
    std::size_t agree = 0;
    for (const auto& p : data.pairs) agree += predict(model, p.features) == (p.label == 1);
    CHECK(agree >= 198);
    CHECK(predict(model, data.pairs[0].features) == predict(model, data.pairs[0].features));
}

TEST_CASE("estimate applies the OR rule") {
    const auto p_low = make(0, {0.0, 0.0}, 0.0);   // normalized a = 0
    const auto p_high = make(1, {10.0, 0.0}, 0.0); // normalized a = 1
    const auto child = make(2, {5.0, 0.0}, 0.0, 0, 1);

    const auto none = estimate(child, &p_low, &p_high, SplitModel(0.2, 0.3), kSpace);
    CHECK_FALSE(none.worth_evaluating);
    CHECK(*none.probability1 == 0.2);
    CHECK(*none.probability2 == 0.3);

    CHECK(estimate(child, &p_low, &p_high, SplitModel(0.9, 0.1), kSpace).worth_evaluating);
    CHECK(estimate(child, &p_low, &p_high, SplitModel(0.1, 0.9), kSpace).worth_evaluating);

    const auto orphan = estimate(child, nullptr, &p_high, SplitModel(0.0, 0.0), kSpace);
    CHECK(orphan.worth_evaluating);
    CHECK_FALSE(orphan.probability1.has_value());
}

TEST_CASE("training set CSV round-trip") {
    const auto data = build_all_pairs_dataset(random_history(12, 5), kSpace);
    std::stringstream s;
    write_training_set_csv(s, data);
    std::string header;
    std::getline(std::stringstream(s.str()), header);
    CHECK(header == "f_0,f_1,f_2,f_3,label");
    const auto back = read_training_set_csv(s);
    CHECK(back.feature_count == data.feature_count);
    CHECK(back.pairs == data.pairs);

    std::stringstream bad("f_0,f_1,label\n0.1,0.2,3\n");
    CHECK_THROWS(read_training_set_csv(bad));
}

TEST_CASE("retraining on the same history gives the same model") {
    std::vector<Solution> h = random_history(30, 6);
    Rng rng(7);
    for (SolutionId id = 30; id < 120; ++id) {
        const auto p1 = rng.index(id);
        const auto p2 = rng.index(id);
        h.push_back(make(id, sample_uniform(kSpace, rng).values, std::round(4.0 * rng.uniform01()), p1, p2));
    }
    const GbtTrainer trainer;
    const auto a = train_model(h, kSpace, trainer);
    const auto b = train_model(h, kSpace, trainer);
    const auto& ga = dynamic_cast<const GbtModel&>(*a);
    const auto& gb = dynamic_cast<const GbtModel&>(*b);
    CHECK(ga.to_json() == gb.to_json());
}

TEST_CASE("majority and constant trainers") {
    TrainingSet data;
    data.feature_count = 2;
    data.pairs = {{{0.0, 0.0}, 1}, {{0.0, 1.0}, 1}, {{1.0, 0.0}, 0}};
    const std::vector<double> x{0.3, 0.3};
    CHECK(MajorityClassTrainer().fit(data)->predict_probability(x) == 1.0);
    CHECK(ConstantTrainer(0.25).fit(data)->predict_probability(x) == 0.25);
}

TEST_CASE("offline estimator evaluation") {
    CHECK_THROWS_AS(evaluate_estimator(random_history(9, 1), kSpace, {}), std::invalid_argument);

    // Objective is a function of the genome, so the pairs are learnable.
    std::vector<Solution> h;
    Rng rng(8);
    for (SolutionId i = 0; i < 60; ++i) {
        const auto g = sample_uniform(kSpace, rng);
        h.push_back(make(i, g.values, g[0] + 5.0 * g[1]));
    }
    const auto report = evaluate_estimator(h, kSpace, {});
    CHECK(report.solutions == 60);
    CHECK(report.pairs == 1770);
    CHECK(report.train_pairs == 1416);
    CHECK(report.train_pairs + report.test_pairs == report.pairs);
    CHECK(report.model_test_accuracy > report.baseline_test_accuracy);
    CHECK(report.warnings.empty());

    std::vector<Solution> flat;
    for (SolutionId i = 0; i < 12; ++i) flat.push_back(make(i, {double(i) / 2.0, 0.0}, 1.0));
    const auto trivial = evaluate_estimator(flat, kSpace, {});
    CHECK(trivial.label1_fraction == 0.0);
    CHECK(trivial.baseline_test_accuracy == 1.0);
    CHECK_FALSE(trivial.warnings.empty());
}
