#include "ieo/cli.hpp"

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ieo/bench.hpp"
#include "ieo/config.hpp"
#include "ieo/estimator.hpp"
#include "ieo/gbt.hpp"
#include "ieo/ieo.hpp"
#include "ieo/trace_io.hpp"

namespace ieo::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted.store(true); }

fs::path default_output_dir() {
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
    return "ieo-out";
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

std::string version_text() {
    std::ostringstream s;
    s << "ieo " << kToolVersion << " (result schema " << kResultSchemaVersion << ", manifest "
      << kManifestVersion << ", model format " << kGbtModelFormatVersion << ")";
    return s.str();
}

json manifest(const std::string& command, const ToolConfig& config, json extra) {
    json m = {{"manifest_version", kManifestVersion},
              {"tool", "ieo"},
              {"tool_version", kToolVersion},
              {"result_schema_version", kResultSchemaVersion},
              {"command", command},
              {"config", config_to_json(config)}};
    for (auto& [k, v] : extra.items()) m[k] = v;
    return m;
}

// --- run --------------------------------------------------------------------

struct RunArgs {
    std::string config;
    std::string algo;
    std::optional<std::uint64_t> seed;
    std::string out;
};

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
    auto loaded = load_config(args.config);
    auto& config = loaded.config;
    std::string algo = args.algo;
    if (algo.empty() && loaded.manifest) algo = loaded.manifest->value("algo", "");
    if (algo.empty()) {
        err << "error: --algo is required (valid choices: ea, ieo)\n";
        return 2;
    }
    if (args.seed)
        config.ieo.ga.seed = *args.seed;
    else if (loaded.manifest && loaded.manifest->contains("seed"))
        config.ieo.ga.seed = loaded.manifest->at("seed").get<std::uint64_t>();

    const auto fitness = make_fitness(config);
    const RunTrace trace = algo == "ea" ? run_ea(config.ieo.ga, *fitness) : run_ieo(config.ieo, *fitness);

    const fs::path dir = args.out.empty() ? default_output_dir() : fs::path(args.out);
    fs::create_directories(dir);
    {
        std::ofstream csv(dir / "trace.csv");
        if (!csv) throw std::runtime_error("cannot write '" + (dir / "trace.csv").string() + "'");
        write_trace_header(csv, trace.directions, fitness->space().size());
        write_trace_rows(csv, 0, algo, trace);
    }
    write_text(dir / "manifest.json",
               manifest("run", config,
                        {{"algo", algo},
                         {"seed", config.ieo.ga.seed},
                         {"outputs", {{"trace", "trace.csv"}}},
                         {"evaluations", trace.evaluations_count},
                         {"skips", trace.skips_count}})
                       .dump(2) +
                   "\n");

    const TraceRecord* best = nullptr;
    const bool maximize = trace.directions[0] == Direction::Maximize;
    for (const auto& r : trace.records) {
        if (!r.has_objectives()) continue;
        if (!best || (maximize ? r.objectives[0] > best->objectives[0] : r.objectives[0] < best->objectives[0]))
            best = &r;
    }
    out << algo << " run: " << trace.evaluations_count << " evaluations, " << trace.skips_count << " skipped, "
        << format_double(trace.total_wall_ms) << " ms\n";
    if (!best) {
        out << "no solution was evaluated successfully\n";
        return 1;
    }
    out << "best objective " << format_double(best->objectives[0]) << " (solution " << best->id << ", generation "
        << best->generation << ")\n";
    const auto& space = fitness->space();
    const auto values = decode(best->genome, space);
    for (std::size_t i = 0; i < space.size(); ++i) {
        out << "  " << space[i].name << " = ";
        if (space[i].kind == ParamKind::Categorical)
            out << space[i].categories[static_cast<std::size_t>(values[i])];
        else
            out << format_double(values[i]);
        out << "\n";
    }
    out << "trace written to " << (dir / "trace.csv").string() << "\n";
    return 0;
}

// --- compare ----------------------------------------------------------------

struct CompareArgs {
    std::string config;
    std::optional<std::size_t> repeats;
    std::optional<std::uint64_t> base_seed;
    std::optional<std::size_t> parallel;
    std::string out;
};

int cmd_compare(const CompareArgs& args, std::ostream& out, std::ostream&) {
    auto loaded = load_config(args.config);
    auto& config = loaded.config;
    if (args.repeats) {
        if (*args.repeats == 0) throw ConfigError("--repeats: must be at least 1");
        config.experiment.repeats = *args.repeats;
    }
    if (args.base_seed) config.experiment.base_seed = *args.base_seed;
    if (args.parallel) config.experiment.trial_parallelism = std::max<std::size_t>(1, *args.parallel);

    const fs::path dir = args.out.empty() ? default_output_dir() : fs::path(args.out);
    ExperimentConfig experiment;
    experiment.ieo = config.ieo;
    experiment.repeats = config.experiment.repeats;
    experiment.base_seed = config.experiment.base_seed;
    experiment.trial_parallelism = config.experiment.trial_parallelism;
    experiment.output_dir = dir;
    experiment.fitness_label = config.fitness.at("type").get<std::string>() == "synthetic"
                                   ? config.fitness.at("name").get<std::string>() + " " +
                                         std::to_string(config.fitness.at("dimension").get<std::size_t>()) + "-D"
                                   : config.fitness.at("type").get<std::string>();
    experiment.metadata = {{"config", config_to_json(config)}, {"tool_version", kToolVersion}};

    g_interrupted.store(false);
    experiment.cancel = &g_interrupted;
    auto* previous = std::signal(SIGINT, on_sigint);
    ExperimentResult result;
    try {
        result = run_experiment(experiment, [&config](std::size_t) { return make_fitness(config); });
    } catch (...) {
        std::signal(SIGINT, previous);
        throw;
    }
    std::signal(SIGINT, previous);

    write_text(dir / "manifest.json",
               manifest("compare", config,
                        {{"outputs", {{"trace", "trace.csv"}, {"result", "result.json"}, {"report", "report.txt"}}},
                         {"truncated", result.truncated}})
                       .dump(2) +
                   "\n");
    out << summarize(result);
    return result.truncated ? 130 : 0;
}

// --- estimator-eval ---------------------------------------------------------

struct EvalArgs {
    std::string trace;
    double split = 0.8;
    std::uint64_t seed = 0;
    std::optional<std::size_t> trial;
    std::string arm;
    std::string config;
    std::string export_dataset;
    std::string save_model;
    std::size_t trees = GbtParams{}.n_trees;
    std::size_t depth = GbtParams{}.max_depth;
    double learning_rate = GbtParams{}.learning_rate;
};

/// Bounds taken from the data when no config is supplied.
ParameterSpace observed_space(const std::vector<Solution>& solutions) {
    const std::size_t n = solutions.front().genome.size();
    std::vector<ParameterSpec> specs;
    for (std::size_t i = 0; i < n; ++i) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const auto& s : solutions) {
            lo = std::min(lo, s.genome[i]);
            hi = std::max(hi, s.genome[i]);
        }
        if (!(hi > lo)) hi = lo + 1.0;
        specs.push_back(ParameterSpec::continuous("x_" + std::to_string(i), lo, hi));
    }
    return ParameterSpace(std::move(specs));
}

int cmd_estimator_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
    const auto traces = read_trace_csv(fs::path(args.trace));
    const LabeledTrace* chosen = nullptr;
    for (const auto& t : traces) {
        if (args.trial && t.trial != *args.trial) continue;
        if (!args.arm.empty() && t.arm != args.arm) continue;
        chosen = &t;
        break;
    }
    if (!chosen) {
        err << "error: no trace in '" << args.trace << "' matches the requested trial/arm\n";
        return 2;
    }

    std::vector<Solution> solutions;
    for (const auto& r : chosen->trace.records) {
        if (!r.has_objectives()) continue;
        Solution s;
        s.id = r.id;
        s.genome = r.genome;
        s.state = ObjectiveState::Evaluated;
        s.objectives = ObjectiveVector(r.objectives, chosen->trace.directions);
        s.parent1 = r.parent1;
        s.parent2 = r.parent2;
        s.generation = r.generation;
        solutions.push_back(std::move(s));
    }
    if (solutions.size() < kMinEstimatorEvalSolutions) {
        err << "error: refusing to evaluate the estimator on " << solutions.size()
            << " evaluated solutions; at least " << kMinEstimatorEvalSolutions
            << " are needed for a meaningful train/test split\n";
        return 2;
    }

    std::optional<ParameterSpace> space;
    if (!args.config.empty()) {
        const auto loaded = load_config(args.config);
        space = make_fitness(loaded.config)->space();
    } else {
        space = observed_space(solutions);
    }

    EstimatorEvalOptions options;
    options.train_fraction = args.split;
    options.seed = args.seed;
    options.gbt.n_trees = args.trees;
    options.gbt.max_depth = args.depth;
    options.gbt.learning_rate = args.learning_rate;
    const auto report = evaluate_estimator(solutions, *space, options);

    if (!args.export_dataset.empty()) {
        std::ofstream csv(args.export_dataset);
        if (!csv) throw std::runtime_error("cannot write '" + args.export_dataset + "'");
        write_training_set_csv(csv, build_all_pairs_dataset(solutions, *space));
    }
    if (!args.save_model.empty()) {
        const auto model = GbtTrainer(options.gbt).train(build_all_pairs_dataset(solutions, *space));
        write_text(args.save_model, model.to_json().dump(2) + "\n");
    }

    auto pct = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * v);
        return std::string(buf);
    };
    out << "estimator evaluation: " << args.trace << " (trial " << chosen->trial << ", arm " << chosen->arm << ")\n";
    out << "evaluated solutions   " << report.solutions << "\n";
    out << "pairs                 " << report.pairs << " (k(k-1)/2 with k = " << report.solutions << ")\n";
    out << "train / test pairs    " << report.train_pairs << " / " << report.test_pairs << "\n";
    out << "label ratio           1: " << format_double(report.label1_fraction)
        << "  0: " << format_double(1.0 - report.label1_fraction) << "\n";
    out << "                      train acc   test acc\n";
    out << "gradient-boosted      " << pct(report.model_train_accuracy) << "      "
        << pct(report.model_test_accuracy) << "\n";
    out << "majority baseline     " << pct(report.baseline_train_accuracy) << "      "
        << pct(report.baseline_test_accuracy) << "\n";
    out << "training wall time    " << format_double(report.training_ms) << " ms\n";
    for (const auto& w : report.warnings) err << "warning: " << w << "\n";
    return 0;
}

// --- report -----------------------------------------------------------------

int cmd_report(const std::string& path, const std::string& out_path, std::ostream& out, std::ostream& err) {
    std::ifstream in(path);
    if (!in) {
        err << "error: cannot open result file '" << path << "'\n";
        return 2;
    }
    const auto doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) {
        err << "error: result file '" << path << "' is not valid JSON\n";
        return 2;
    }
    const auto result = result_from_json(doc);
    const auto text = summarize(result);
    if (!out_path.empty()) write_text(out_path, text);
    out << text;
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Evolutionary hyperparameter optimization with learned evaluation skipping", "ieo"};
    app.require_subcommand(0, 1);
    bool show_version = false;
    app.add_flag("--version", show_version, "Print tool and schema versions");

    RunArgs run_args;
    auto* run_cmd = app.add_subcommand("run", "Run one optimization and write its trace and manifest");
    run_cmd->add_option("--config", run_args.config, "Config file or run manifest")->required();
    run_cmd->add_option("--algo", run_args.algo, "Optimizer")->check(CLI::IsMember({"ea", "ieo"}));
    run_cmd->add_option("--seed", run_args.seed, "Random seed (overrides the config)");
    run_cmd->add_option("--out", run_args.out, std::string("Output directory (default $") + kOutputDirEnv + " or ieo-out)");

    CompareArgs cmp_args;
    auto* cmp_cmd = app.add_subcommand("compare", "Run the paired EA vs IEO experiment");
    cmp_cmd->add_option("--config", cmp_args.config, "Config file or manifest")->required();
    cmp_cmd->add_option("--repeats", cmp_args.repeats, "Number of paired trials (default 30)");
    cmp_cmd->add_option("--base-seed", cmp_args.base_seed, "Seed of trial 0");
    cmp_cmd->add_option("--parallel", cmp_args.parallel, "Trials run concurrently (capped at core count)");
    cmp_cmd->add_option("--out", cmp_args.out, "Output directory");

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("estimator-eval", "Train/test the dominance estimator on a stored trace");
    eval_cmd->add_option("--trace", eval_args.trace, "Trace CSV")->required();
    eval_cmd->add_option("--split", eval_args.split, "Training fraction")->check(CLI::Range(0.0, 1.0));
    eval_cmd->add_option("--seed", eval_args.seed, "Shuffle seed");
    eval_cmd->add_option("--trial", eval_args.trial, "Trial to use (default: first in file)");
    eval_cmd->add_option("--arm", eval_args.arm, "Arm to use (default: first in file)");
    eval_cmd->add_option("--config", eval_args.config, "Config giving the parameter bounds");
    eval_cmd->add_option("--export-dataset", eval_args.export_dataset, "Write the pair dataset as CSV");
    eval_cmd->add_option("--save-model", eval_args.save_model, "Write a model trained on all pairs as JSON");
    eval_cmd->add_option("--trees", eval_args.trees, "Boosting rounds");
    eval_cmd->add_option("--depth", eval_args.depth, "Tree depth");
    eval_cmd->add_option("--learning-rate", eval_args.learning_rate, "Shrinkage");

    std::string result_path;
    std::string report_out;
    auto* rep_cmd = app.add_subcommand("report", "Re-render the report of a stored result");
    rep_cmd->add_option("--result", result_path, "result.json")->required();
    rep_cmd->add_option("--out", report_out, "Also write the report to this file");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (show_version) {
            out << version_text() << "\n";
            return 0;
        }
        if (*run_cmd) return cmd_run(run_args, out, err);
        if (*cmp_cmd) return cmd_compare(cmp_args, out, err);
        if (*eval_cmd) return cmd_estimator_eval(eval_args, out, err);
        if (*rep_cmd) return cmd_report(result_path, report_out, out, err);
        out << app.help();
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace ieo::cli
