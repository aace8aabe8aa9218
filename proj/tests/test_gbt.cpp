#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "ieo/core.hpp"
#include "ieo/gbt.hpp"
#include "ieo/random.hpp"

using namespace ieo;

namespace {

// Linearly separable in 4 features, with a margin around the boundary.
TrainingSet separable_set(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    TrainingSet data;
    data.feature_count = 4;
    while (data.size() < n) {
        std::vector<double> x(4);
        for (auto& v : x) v = rng.uniform01();
        const double margin = x[0] + 0.5 * x[1] - x[2] - 0.25 * x[3];
        if (std::abs(margin) < 0.05) continue;
        data.pairs.push_back({x, margin > 0.0 ? 1 : 0});
    }
    return data;
}

double manual_raw(const GbtModel& model, std::span<const double> x) {
    double sum = 0.0;
    for (const auto& tree : model.trees()) {
        const auto nodes = tree.nodes();
        int i = 0;
        while (!nodes[i].is_leaf()) i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
        sum += nodes[i].value;
    }
    return model.base_score() + model.params().learning_rate * sum;
}

}  // namespace

TEST_CASE("parameter validation") {
    GbtParams p;
    CHECK_NOTHROW(validate(p));
    p.n_trees = 0;
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
    p = GbtParams{};
    p.learning_rate = 0.0;
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
    p = GbtParams{};
    p.max_depth = 0;
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
}

TEST_CASE("sigmoid and log loss") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(1000.0) == doctest::Approx(1.0));
    CHECK(sigmoid(-1000.0) == doctest::Approx(0.0));
    const std::vector<double> raw{0.0, 0.0};
    const std::vector<int> labels{0, 1};
    CHECK(log_loss(raw, labels) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("memorizes a separable 200-pair set") {
    const auto data = separable_set(200, 1);
    GbtParams p;
    p.n_trees = 100;
    p.max_depth = 3;
    const auto model = GbtTrainer(p).train(data);
    std::size_t correct = 0;
    for (const auto& pair : data.pairs) correct += (model.predict_probability(pair.features) >= 0.5) == (pair.label == 1);
    CHECK(static_cast<double>(correct) / 200.0 >= 0.99);
    CHECK_FALSE(model.degenerate());
}

TEST_CASE("structure invariants and prediction formula") {
    const auto data = separable_set(300, 2);
    GbtParams p;
    p.n_trees = 40;
    p.max_depth = 2;
    p.learning_rate = 0.3;
    const auto model = GbtTrainer(p).train(data);
    CHECK(model.trees().size() <= 40);
    CHECK(model.feature_count() == 4);
    for (const auto& tree : model.trees()) {
        CHECK(tree.depth() <= 2);
        for (const auto& node : tree.nodes())
            if (!node.is_leaf()) CHECK(node.feature < 4);
    }
    // base_score is the log-odds of the label-1 prevalence.
    const double prior = data.label1_fraction();
    CHECK(model.base_score() == doctest::Approx(std::log(prior / (1.0 - prior))));
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> x(4);
        for (auto& v : x) v = rng.uniform01();
        const double raw = manual_raw(model, x);
        CHECK(model.raw_score(x) == doctest::Approx(raw).epsilon(1e-12));
        const double prob = model.predict_probability(x);
        CHECK(prob == doctest::Approx(sigmoid(raw)).epsilon(1e-12));
        CHECK(prob >= 0.0);
        CHECK(prob <= 1.0);
    }
}

TEST_CASE("training loss never increases") {
    for (std::uint64_t seed : {4u, 5u, 6u}) {
        // Noisy labels so the loss does not collapse to zero immediately.
        auto data = separable_set(250, seed);
        Rng rng(seed);
        for (auto& pair : data.pairs)
            if (rng.bernoulli(0.15)) pair.label = 1 - pair.label;
        GbtParams p;
        p.learning_rate = 0.5;
        const auto model = GbtTrainer(p).train(data);
        const auto loss = model.training_loss();
        REQUIRE(loss.size() >= 2);
        for (std::size_t i = 1; i < loss.size(); ++i) CHECK(loss[i] <= loss[i - 1] + 1e-12);
        CHECK(loss.back() < loss.front());
    }
}

TEST_CASE("single-class data gives a constant model") {
    TrainingSet data;
    data.feature_count = 2;
    for (int i = 0; i < 20; ++i) data.pairs.push_back({{0.05 * i, 1.0 - 0.05 * i}, 0});
    const auto model = GbtTrainer().train(data);
    CHECK(model.degenerate());
    CHECK(model.trees().empty());
    const double expected = sigmoid(model.base_score());
    for (int i = 0; i < 10; ++i) {
        const std::vector<double> x{0.1 * i, 0.3};
        CHECK(model.predict_probability(x) == expected);
    }
    CHECK(expected < 0.5);

    TrainingSet empty;
    empty.feature_count = 2;
    CHECK(GbtTrainer().train(empty).degenerate());
}

TEST_CASE("feature-length mismatch is a contract violation") {
    const auto model = GbtTrainer().train(separable_set(50, 7));
    const std::vector<double> short_x{0.1, 0.2};
    CHECK_THROWS_AS(model.predict_probability(short_x), ContractViolation);
}

TEST_CASE("fitting is deterministic") {
    const auto data = separable_set(150, 8);
    const auto a = GbtTrainer().train(data);
    const auto b = GbtTrainer().train(data);
    CHECK(a.to_json() == b.to_json());
}

TEST_CASE("JSON round-trip") {
    const auto model = GbtTrainer().train(separable_set(120, 9));
    const auto doc = model.to_json();
    CHECK(doc.at("version") == kGbtModelFormatVersion);
    const auto back = GbtModel::from_json(nlohmann::json::parse(doc.dump()));
    CHECK(back.to_json() == doc);
    Rng rng(10);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> x(4);
        for (auto& v : x) v = rng.uniform01();
        CHECK(back.predict_probability(x) == model.predict_probability(x));
    }
    auto wrong = doc;
    wrong["version"] = 99;
    CHECK_THROWS(GbtModel::from_json(wrong));
}
