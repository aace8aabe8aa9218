#include <doctest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "ieo/dataset.hpp"
#include "ieo/evolution.hpp"
#include "ieo/knn.hpp"
#include "ieo/objectives.hpp"

using namespace ieo;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("ieo-objectives-" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path write(const std::string& name, const std::string& text) const {
        std::ofstream(path / name) << text;
        return path / name;
    }
};

double value(const FitnessPtr& f, std::vector<double> x) { return f->evaluate(Genome{std::move(x)}).values[0]; }

/// Two Gaussian blobs far apart in 2-D, labels "a" and "b".
std::string blobs_csv(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> noise(0.0, 0.5);
    std::string text = "u,v,label\n";
    for (std::size_t i = 0; i < n; ++i) {
        const bool b = i % 2 == 1;
        const double cx = b ? 5.0 : 0.0;
        text += std::to_string(cx + noise(rng.engine())) + "," + std::to_string(cx + noise(rng.engine())) + "," +
                (b ? "b" : "a") + "\n";
    }
    return text;
}

}  // namespace

TEST_CASE("synthetic benchmarks") {
    const auto sphere = synthetic_fitness("sphere", 3);
    CHECK(value(sphere, {0, 0, 0}) == 0.0);
    CHECK(value(sphere, {1, 2, 3}) == 14.0);
    CHECK(sphere->directions() == std::vector{Direction::Minimize});
    CHECK(sphere->space()[0].lower == -5.12);

    const auto rastrigin = synthetic_fitness("rastrigin", 4);
    CHECK(value(rastrigin, {0, 0, 0, 0}) == 0.0);
    CHECK(value(rastrigin, {1, 0, 0, 0}) == doctest::Approx(1.0));

    const auto ackley = synthetic_fitness("ackley", 5);
    CHECK(value(ackley, {0, 0, 0, 0, 0}) == 0.0);
    CHECK(value(ackley, {1, 1, 1, 1, 1}) > 3.0);

    const auto rosenbrock = synthetic_fitness("rosenbrock", 3);
    CHECK(value(rosenbrock, {1, 1, 1}) == 0.0);
    CHECK(value(rosenbrock, {0, 0, 0}) == 2.0);

    CHECK_THROWS_AS(synthetic_fitness("griewank", 2), ConfigError);
    CHECK_THROWS_AS(synthetic_fitness("sphere", 0), ConfigError);
}

TEST_CASE("synthetic benchmark over custom bounds") {
    const auto f = synthetic_fitness("sphere", ParameterSpace({ParameterSpec::continuous("a", 1.0, 2.0)}));
    CHECK(f->space()[0].lower == 1.0);
    CHECK(value(f, {1.5}) == 2.25);
    CHECK_THROWS_AS(synthetic_fitness("sphere", ParameterSpace({ParameterSpec::integer("k", 1, 3)})), ConfigError);
}

TEST_CASE("delay wrapper") {
    const auto inner = synthetic_fitness("sphere", 2);
    const auto zero = delay_wrapper(inner, std::chrono::microseconds(0));
    CHECK(value(zero, {0.3, -1.2}) == value(inner, {0.3, -1.2}));

    const auto slow = delay_wrapper(inner, std::chrono::milliseconds(50));
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < 10; ++i) CHECK(value(slow, {1.0, double(i)}) == value(inner, {1.0, double(i)}));
    CHECK(std::chrono::steady_clock::now() - t0 >= std::chrono::milliseconds(500));

    CHECK_THROWS_AS(delay_wrapper(inner, std::chrono::microseconds(-1)), ConfigError);
}

TEST_CASE("delay changes timing only") {
    const auto inner = synthetic_fitness("sphere", 3);
    const auto slow = delay_wrapper(inner, std::chrono::milliseconds(1));
    GaConfig c;
    c.population_size = 10;
    c.generations = 4;
    c.seed = 12;
    const auto fast_trace = run_ea(c, *inner);
    const auto slow_trace = run_ea(c, *slow);
    CHECK(same_search_path(fast_trace, slow_trace));
    CHECK(slow_trace.total_wall_ms > fast_trace.total_wall_ms);
    for (const auto& r : slow_trace.records) CHECK(r.eval_ms >= 1.0);
}

TEST_CASE("CSV ingestion") {
    TempDir dir;
    SUBCASE("clean file") {
        const auto p = dir.write("clean.csv", "a,b,label\n1,10,x\n2,20,y\n3,20,x\n");
        const auto loaded = load_csv(p, "label");
        CHECK(loaded.report.rows_kept == 3);
        CHECK(loaded.report.rows_dropped == 0);
        CHECK(loaded.dataset.rows == 3);
        CHECK(loaded.dataset.cols == 2);
        CHECK(loaded.dataset.class_names == std::vector<std::string>{"x", "y"});
        CHECK(loaded.dataset.labels == std::vector<int>{0, 1, 0});
        CHECK(loaded.dataset.features == std::vector<double>{0.0, 0.0, 0.5, 1.0, 1.0, 1.0});
    }
    SUBCASE("missing values drop rows") {
        const auto p = dir.write("holes.csv", "a,label,b\n1,0,5\n?,1,6\n3,1,\n4,1,7\n");
        const auto loaded = load_csv(p, "label");
        CHECK(loaded.report.rows_read == 4);
        CHECK(loaded.report.rows_dropped == 2);
        CHECK(loaded.dataset.rows == 2);
    }
    SUBCASE("constant columns become zero") {
        const auto p = dir.write("const.csv", "a,b,label\n7,1,0\n7,2,1\n7,3,1\n");
        const auto d = load_csv(p, "label").dataset;
        for (std::size_t r = 0; r < 3; ++r) CHECK(d.row(r)[0] == 0.0);
    }
    SUBCASE("numeric labels sort numerically") {
        const auto p = dir.write("num.csv", "a,label\n1,10\n2,9\n3,10\n");
        const auto d = load_csv(p, "label").dataset;
        CHECK(d.class_names == std::vector<std::string>{"9", "10"});
        CHECK(d.labels == std::vector<int>{1, 0, 1});
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(load_csv(dir.path / "nope.csv", "label"), DatasetError);
        CHECK_THROWS_AS(load_csv(dir.write("nolabel.csv", "a,b\n1,2\n"), "label"), DatasetError);
        CHECK_THROWS_AS(load_csv(dir.write("text.csv", "a,label\nfoo,1\nbar,0\n"), "label"), DatasetError);
        CHECK_THROWS_AS(load_csv(dir.write("one.csv", "a,label\n1,1\n2,1\n"), "label"), DatasetError);
    }
    SUBCASE("quoted fields and idempotence") {
        CHECK(split_csv_line("\"a,b\",c") == std::vector<std::string>{"a,b", "c"});
        const auto p = dir.write("blobs.csv", blobs_csv(40, 1));
        CHECK(load_csv(p, "label").dataset == load_csv(p, "label").dataset);
    }
}

TEST_CASE("k-NN classifier") {
    const std::vector<double> x{0.0, 0.0, 0.1, 0.0, 1.0, 1.0, 0.9, 1.0, 1.0, 0.9};
    const std::vector<int> y{0, 0, 1, 1, 1};
    const KnnClassifier knn(x, 2, y, 2);
    const std::vector<double> q0{0.05, 0.0};
    const std::vector<double> q1{0.95, 0.95};
    CHECK(knn.predict(q0, {1, false, 2.0}) == 0);
    CHECK(knn.predict(q1, {3, false, 2.0}) == 1);
    CHECK(knn.predict(q0, {5, false, 2.0}) == 1);
    CHECK(knn.predict(q0, {5, true, 2.0}) == 0);
    const std::vector<double> a{0.0, 0.0};
    const std::vector<double> b{3.0, 4.0};
    CHECK(minkowski_distance(a, b, 2.0) == doctest::Approx(5.0));
    CHECK(minkowski_distance(a, b, 1.0) == doctest::Approx(7.0));
}

TEST_CASE("k-NN tuning fitness") {
    TempDir dir;
    const auto data = load_csv(dir.write("blobs.csv", blobs_csv(200, 2)), "label").dataset;
    const KnnTuningFitness fitness(data, 3);
    CHECK(fitness.space().size() == 3);
    CHECK(fitness.space()[0].name == "k");
    CHECK(fitness.directions() == std::vector{Direction::Maximize});
    CHECK(fitness.train_size() + fitness.test_size() == 200);
    CHECK(fitness.test_size() == 60);

    Rng rng(4);
    for (int i = 0; i < 20; ++i) {
        const auto g = sample_uniform(fitness.space(), rng);
        const double acc = fitness.evaluate(g).values[0];
        CHECK(acc >= 0.95);
        CHECK(acc <= 1.0);
        CHECK(fitness.evaluate(g) == fitness.evaluate(g));
    }

    // A tiny dataset makes k = 25 exceed the training set.
    const auto small = load_csv(dir.write("small.csv", blobs_csv(12, 5)), "label").dataset;
    const KnnTuningFitness tiny(small, 1);
    const Genome big_k{{25.0, 0.0, 2.0}};
    CHECK(tiny.decode_genome(big_k).k == tiny.train_size() - 1);
    const double acc = tiny.evaluate(big_k).values[0];
    CHECK(acc >= 0.0);
    CHECK(acc <= 1.0);
}

TEST_CASE("external command fitness") {
    TempDir dir;
    const ParameterSpace space({ParameterSpec::continuous("x", 0.0, 1.0), ParameterSpec::categorical("mode", {"a", "b"})});
    const auto script = dir.write("f.py",
                                  "import json, sys\n"
                                  "req = json.load(sys.stdin)\n"
                                  "print(json.dumps({'objectives': [req['x'] * 2 + (1 if req['mode'] == 'b' else 0)]}))\n");
    const CommandFitness good("python3 '" + script.string() + "'", space, {Direction::Maximize}, false);
    CHECK(good.evaluate(Genome{{0.25, 1.0}}).values[0] == doctest::Approx(1.5));
    CHECK_FALSE(good.concurrency_safe());

    const CommandFitness failing("exit 3", space, {Direction::Maximize}, false);
    CHECK_THROWS(failing.evaluate(Genome{{0.5, 0.0}}));
    const CommandFitness garbage("cat > /dev/null; echo nonsense", space, {Direction::Maximize}, false);
    CHECK_THROWS(garbage.evaluate(Genome{{0.5, 0.0}}));
    const CommandFitness wrong_count("cat > /dev/null; echo '{\"objectives\": [1, 2]}'", space,
                                     {Direction::Maximize}, false);
    CHECK_THROWS(wrong_count.evaluate(Genome{{0.5, 0.0}}));
}
