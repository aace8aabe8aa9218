#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "ieo/bench.hpp"
#include "ieo/trace_io.hpp"

using namespace ieo;
namespace fs = std::filesystem;

namespace {

TraceRecord record(std::size_t generation, double value) {
    TraceRecord r;
    r.generation = generation;
    r.genome = Genome{{0.0}};
    r.objectives = {value};
    return r;
}

RunTrace trace_of(std::vector<std::pair<std::size_t, double>> points, Direction d = Direction::Minimize) {
    RunTrace t;
    t.directions = {d};
    for (auto [g, v] : points) t.records.push_back(record(g, v));
    return t;
}

ExperimentConfig small_experiment(std::size_t repeats) {
    ExperimentConfig c;
    c.ieo.ga.population_size = 12;
    c.ieo.ga.generations = 10;
    c.repeats = repeats;
    c.base_seed = 100;
    c.fitness_label = "sphere-3";
    return c;
}

FitnessFactory sphere_factory() {
    return [](std::size_t) { return synthetic_fitness("sphere", 3); };
}

TrialRecord trial(std::size_t i, Arm arm, double wall, double best, std::size_t conv) {
    TrialRecord r;
    r.trial = i;
    r.arm = arm;
    r.wall_time_ms = wall;
    r.best_objective = best;
    r.convergence_iteration = conv;
    r.evaluations = 100;
    return r;
}

}  // namespace

TEST_CASE("convergence iteration") {
    CHECK(convergence_iteration(trace_of({{0, 5.0}, {1, 3.0}, {2, 4.0}, {3, 3.0}})) == 1);
    CHECK(convergence_iteration(trace_of({{0, 1.0}, {1, 3.0}})) == 0);
    CHECK(convergence_iteration(trace_of({{0, 1.0}, {1, 3.0}, {2, 0.5}})) == 2);
    CHECK(convergence_iteration(trace_of({{0, 1.0}, {1, 3.0}}, Direction::Maximize)) == 1);

    RunTrace empty;
    empty.directions = {Direction::Minimize};
    CHECK_THROWS_AS(convergence_iteration(empty), std::invalid_argument);
}

TEST_CASE("arms") {
    CHECK(std::string(to_string(Arm::EA)) == "EA");
    CHECK(arm_from_string("ea") == Arm::EA);
    CHECK(arm_from_string("ieo") == Arm::IEO);
    CHECK_THROWS_AS(arm_from_string("ga"), std::invalid_argument);
}

TEST_CASE("summary arithmetic") {
    std::vector<TrialRecord> records{trial(0, Arm::EA, 100.0, 1.0, 5), trial(0, Arm::IEO, 80.0, 1.2, 6),
                                     trial(1, Arm::EA, 200.0, 2.0, 8), trial(1, Arm::IEO, 100.0, 2.0, 8)};
    records[1].evaluations = 90;
    records[1].skips = 10;
    records[3].evaluations = 70;
    records[3].skips = 30;
    const auto s = compute_summary(records);
    CHECK(s.completed_trials == 2);
    REQUIRE(s.time_saving.size() == 2);
    CHECK(s.time_saving[0] == doctest::Approx(0.2));
    CHECK(s.time_saving[1] == doctest::Approx(0.5));
    // Mean of the per-trial fractions, not the ratio of summed times (which would be 0.4).
    CHECK(s.mean_time_saving == doctest::Approx(0.35));
    CHECK(s.max_time_saving == doctest::Approx(0.5));
    CHECK(s.max_speedup == doctest::Approx(2.0));
    CHECK(s.ea_evaluations == 200);
    CHECK(s.ieo_evaluations == 160);
    CHECK(s.ieo_skips == 40);
    CHECK(s.skip_rate == doctest::Approx(40.0 / 200.0));
    CHECK(s.normalized_time_ea == std::vector<double>{0.5, 1.0});
    CHECK(s.normalized_time_ieo == std::vector<double>{0.4, 0.5});
    // Too few pairs for a Wilcoxon test.
    CHECK_FALSE(s.wilcoxon_time.has_value());
}

TEST_CASE("paired experiment") {
    const fs::path dir = fs::temp_directory_path() / ("ieo-bench-" + std::to_string(::getpid()));
    fs::remove_all(dir);
    auto c = small_experiment(3);
    c.output_dir = dir;
    const auto result = run_experiment(c, sphere_factory());

    REQUIRE(result.records.size() == 6);
    CHECK_FALSE(result.truncated);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(result.records[i].trial == i / 2);
        CHECK(result.records[i].arm == (i % 2 == 0 ? Arm::EA : Arm::IEO));
        CHECK(result.records[i].seed == 100 + i / 2);
    }
    for (std::size_t t = 0; t < 3; ++t) {
        const auto& ea = result.records[2 * t];
        const auto& ieo = result.records[2 * t + 1];
        CHECK(ea.evaluations == c.ieo.ga.planned_evaluations());
        CHECK(ea.skips == 0);
        CHECK(ea.evaluations - ieo.evaluations == ieo.skips);
    }

    CHECK(fs::exists(dir / "result.json"));
    CHECK(fs::exists(dir / "report.txt"));
    const auto traces = read_trace_csv(dir / "trace.csv");
    REQUIRE(traces.size() == 6);
    // Both arms of a trial start from the same initial population.
    for (std::size_t t = 0; t < 3; ++t) {
        const auto& ea = traces[2 * t].trace;
        const auto& ieo = traces[2 * t + 1].trace;
        CHECK(traces[2 * t].arm == "ea");
        CHECK(traces[2 * t + 1].arm == "ieo");
        for (std::size_t i = 0; i < c.ieo.ga.population_size; ++i) {
            CHECK(ea.records[i].genome == ieo.records[i].genome);
            CHECK(ea.records[i].objectives == ieo.records[i].objectives);
        }
    }

    std::ifstream report(dir / "report.txt");
    std::stringstream text;
    text << report.rdbuf();
    CHECK(text.str() == summarize(result));
    CHECK(text.str().find("mean saving ") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("full warm-up makes both arms identical") {
    auto c = small_experiment(6);
    c.ieo.warmup_fraction = 1.0;
    const auto result = run_experiment(c, sphere_factory());
    for (std::size_t t = 0; t < 6; ++t) {
        CHECK(result.records[2 * t].evaluations == result.records[2 * t + 1].evaluations);
        CHECK(result.records[2 * t].best_objective == result.records[2 * t + 1].best_objective);
        CHECK(result.records[2 * t].convergence_iteration == result.records[2 * t + 1].convergence_iteration);
    }
    CHECK(result.summary.ieo_skips == 0);
    const auto& p = result.summary.wilcoxon_optimality;
    CHECK((!p.has_value() || *p == 1.0));
}

TEST_CASE("report headline and derived counts") {
    const auto result = run_experiment(small_experiment(2), sphere_factory());
    const auto& s = result.summary;
    const std::string report = summarize(result);
    char headline[96];
    std::snprintf(headline, sizeof headline, "mean saving %.2f%%, max saving %.2f%%", 100.0 * s.mean_time_saving,
                  100.0 * s.max_time_saving);
    CHECK(report.find(headline) != std::string::npos);
    CHECK(s.ea_evaluations - s.ieo_evaluations == s.ieo_skips);
    CHECK(s.max_speedup == doctest::Approx(1.0 / (1.0 - s.max_time_saving)).epsilon(1e-12));
    CHECK(report == summarize(result));
}

TEST_CASE("cancellation truncates between trials") {
    std::atomic<bool> cancel{true};
    auto c = small_experiment(4);
    c.cancel = &cancel;
    const auto result = run_experiment(c, sphere_factory());
    CHECK(result.truncated);
    CHECK(result.records.empty());
    CHECK(summarize(result).find("[TRUNCATED]") != std::string::npos);
}

TEST_CASE("result JSON round-trip and schema check") {
    const auto result = run_experiment(small_experiment(2), sphere_factory());
    const auto doc = to_json(result);
    const auto back = result_from_json(nlohmann::json::parse(doc.dump()));
    CHECK(to_json(back) == doc);
    CHECK(summarize(back) == summarize(result));

    auto old = doc;
    old["schema_version"] = 0;
    try {
        result_from_json(old);
        FAIL("expected a schema error");
    } catch (const std::invalid_argument& e) {
        const std::string what = e.what();
        CHECK(what.find('0') != std::string::npos);
        CHECK(what.find(std::to_string(kResultSchemaVersion)) != std::string::npos);
    }
    CHECK_THROWS_AS(result_from_json(nlohmann::json::object()), std::invalid_argument);
    auto broken = doc;
    broken.erase("records");
    CHECK_THROWS_AS(result_from_json(broken), std::invalid_argument);
}

TEST_CASE("trace CSV round-trip") {
    IeoConfig c;
    c.ga.population_size = 10;
    c.ga.generations = 12;
    c.ga.seed = 3;
    const auto fitness = synthetic_fitness("rastrigin", 2);
    const auto trace = run_ieo(c, *fitness);
    std::stringstream s;
    write_trace_header(s, trace.directions, 2);
    write_trace_rows(s, 4, "ieo", trace);
    auto back = read_trace_csv(s);
    REQUIRE(back.size() == 1);
    // Per-generation bests are not part of the file.
    CHECK(back[0].trace.best_per_generation.empty());
    back[0].trace.best_per_generation = trace.best_per_generation;
    CHECK(back[0].trial == 4);
    CHECK(back[0].arm == "ieo");
    CHECK(same_search_path(back[0].trace, trace));
    CHECK(back[0].trace.skips_count == trace.skips_count);
    CHECK(back[0].trace.evaluations_count == trace.evaluations_count);

    CHECK(format_double(0.1) == "0.1");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
