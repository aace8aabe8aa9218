#include "ieo/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "ieo/stats.hpp"
#include "ieo/trace_io.hpp"

namespace ieo {

const char* to_string(Arm arm) { return arm == Arm::EA ? "EA" : "IEO"; }

Arm arm_from_string(const std::string& text) {
    if (text == "EA" || text == "ea") return Arm::EA;
    if (text == "IEO" || text == "ieo") return Arm::IEO;
    throw std::invalid_argument("unknown arm '" + text + "'");
}

std::size_t convergence_iteration(const RunTrace& trace) {
    const bool maximize = !trace.directions.empty() && trace.directions[0] == Direction::Maximize;
    std::map<std::size_t, double> best_in_generation;
    for (const auto& r : trace.records) {
        if (!r.has_objectives()) continue;
        auto [it, inserted] = best_in_generation.emplace(r.generation, r.objectives[0]);
        if (!inserted && (maximize ? r.objectives[0] > it->second : r.objectives[0] < it->second))
            it->second = r.objectives[0];
    }
    if (best_in_generation.empty())
        throw std::invalid_argument("convergence_iteration: trace has no evaluated solution");
    const double final_best = *trace.best_objective();
    double so_far = best_in_generation.begin()->second;
    for (const auto& [generation, value] : best_in_generation) {
        if (maximize ? value > so_far : value < so_far) so_far = value;
        if (so_far == final_best) return generation;
    }
    return best_in_generation.rbegin()->first;
}

TrialRecord summarize_trial(std::size_t trial, Arm arm, std::uint64_t seed, const RunTrace& trace) {
    TrialRecord r;
    r.trial = trial;
    r.arm = arm;
    r.seed = seed;
    r.wall_time_ms = trace.total_wall_ms;
    r.best_objective = trace.best_objective().value_or(std::nan(""));
    r.convergence_iteration = convergence_iteration(trace);
    r.evaluations = trace.evaluations_count;
    r.skips = trace.skips_count;
    return r;
}

namespace {

std::optional<double> wilcoxon_p(const std::vector<double>& x, const std::vector<double>& y) {
    try {
        return stats::wilcoxon_signed_rank(x, y).p_value;
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

std::optional<double> ttest_p(const std::vector<double>& x, const std::vector<double>& y) {
    try {
        return stats::paired_t_test(x, y).p_value;
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

std::vector<double> normalized_or_empty(const std::vector<double>& values, double reference) {
    if (!(reference > 0.0)) return {};
    return stats::normalize_by_max(values, reference);
}

}  // namespace

ExperimentSummary compute_summary(const std::vector<TrialRecord>& records, std::vector<std::string>* warnings) {
    std::map<std::size_t, std::pair<const TrialRecord*, const TrialRecord*>> paired;
    for (const auto& r : records) {
        auto& slot = paired[r.trial];
        (r.arm == Arm::EA ? slot.first : slot.second) = &r;
    }
    std::vector<double> time_ea, time_ieo, conv_ea, conv_ieo, best_ea, best_ieo;
    ExperimentSummary s;
    std::size_t planned = 0;
    for (const auto& [trial, pair] : paired) {
        if (!pair.first || !pair.second) {
            if (warnings) warnings->push_back("trial " + std::to_string(trial) + " lacks one arm; excluded");
            continue;
        }
        const auto& ea = *pair.first;
        const auto& ieo = *pair.second;
        time_ea.push_back(ea.wall_time_ms);
        time_ieo.push_back(ieo.wall_time_ms);
        conv_ea.push_back(static_cast<double>(ea.convergence_iteration));
        conv_ieo.push_back(static_cast<double>(ieo.convergence_iteration));
        best_ea.push_back(ea.best_objective);
        best_ieo.push_back(ieo.best_objective);
        s.time_saving.push_back(1.0 - ieo.wall_time_ms / ea.wall_time_ms);
        s.ea_evaluations += ea.evaluations;
        s.ieo_evaluations += ieo.evaluations;
        s.ieo_skips += ieo.skips;
        planned += ieo.evaluations + ieo.skips;
    }
    s.completed_trials = s.time_saving.size();
    if (s.completed_trials == 0) return s;

    double total = 0.0;
    for (double f : s.time_saving) total += f;
    s.mean_time_saving = total / static_cast<double>(s.completed_trials);
    s.max_time_saving = *std::max_element(s.time_saving.begin(), s.time_saving.end());
    s.max_speedup = 1.0 / (1.0 - s.max_time_saving);
    s.skip_rate = planned ? static_cast<double>(s.ieo_skips) / static_cast<double>(planned) : 0.0;

    s.wilcoxon_time = wilcoxon_p(time_ea, time_ieo);
    s.ttest_time = ttest_p(time_ea, time_ieo);
    s.wilcoxon_convergence = wilcoxon_p(conv_ea, conv_ieo);
    s.ttest_convergence = ttest_p(conv_ea, conv_ieo);
    s.wilcoxon_optimality = wilcoxon_p(best_ea, best_ieo);
    s.ttest_optimality = ttest_p(best_ea, best_ieo);

    const double max_time = *std::max_element(time_ea.begin(), time_ea.end());
    s.normalized_time_ea = normalized_or_empty(time_ea, max_time);
    s.normalized_time_ieo = normalized_or_empty(time_ieo, max_time);
    const double max_conv = *std::max_element(conv_ea.begin(), conv_ea.end());
    s.normalized_convergence_ea = normalized_or_empty(conv_ea, max_conv);
    s.normalized_convergence_ieo = normalized_or_empty(conv_ieo, max_conv);
    const double max_best = *std::max_element(best_ea.begin(), best_ea.end());
    s.normalized_best_ea = normalized_or_empty(best_ea, max_best);
    s.normalized_best_ieo = normalized_or_empty(best_ieo, max_best);
    return s;
}

namespace {

struct TrialOutcome {
    bool ok = false;
    TrialRecord ea;
    TrialRecord ieo;
    RunTrace ea_trace;
    RunTrace ieo_trace;
    std::string error;
};

TrialOutcome run_trial(const ExperimentConfig& config, const FitnessFactory& make_fitness, std::size_t trial) {
    TrialOutcome out;
    try {
        const auto fitness = make_fitness(trial);
        IeoConfig ieo = config.ieo;
        ieo.ga.seed = config.base_seed + trial;
        out.ea_trace = run_ea(ieo.ga, *fitness);
        out.ieo_trace = run_ieo(ieo, *fitness);
        out.ea = summarize_trial(trial, Arm::EA, ieo.ga.seed, out.ea_trace);
        out.ieo = summarize_trial(trial, Arm::IEO, ieo.ga.seed, out.ieo_trace);
        out.ok = true;
    } catch (const std::exception& e) {
        out.error = "trial " + std::to_string(trial) + " failed: " + e.what();
    }
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << content;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const FitnessFactory& make_fitness) {
    if (config.repeats == 0) throw std::invalid_argument("experiment.repeats must be at least 1");
    validate(config.ieo);

    ExperimentResult result;
    result.fitness = config.fitness_label;
    result.repeats_requested = config.repeats;
    result.base_seed = config.base_seed;
    result.metadata = config.metadata;
    const std::size_t cores = std::max(1u, std::thread::hardware_concurrency());
    result.trial_parallelism = std::clamp<std::size_t>(config.trial_parallelism, 1, cores);
    if (result.trial_parallelism < config.trial_parallelism)
        result.warnings.push_back("trial parallelism capped at " + std::to_string(cores) + " cores");

    std::ofstream trace_out;
    bool header_written = false;
    if (!config.output_dir.empty()) {
        std::filesystem::create_directories(config.output_dir);
        trace_out.open(config.output_dir / "trace.csv");
        if (!trace_out) throw std::runtime_error("cannot write trace.csv in " + config.output_dir.string());
    }

    std::vector<std::optional<TrialOutcome>> outcomes(config.repeats);
    std::mutex mutex;
    std::size_t next_trial = 0;
    std::size_t next_to_flush = 0;
    bool stopped = false;

    // Flush completed trials in order so the trace file is always a prefix.
    auto flush_ready = [&] {
        while (next_to_flush < outcomes.size() && outcomes[next_to_flush]) {
            auto& o = *outcomes[next_to_flush];
            if (o.ok) {
                result.records.push_back(o.ea);
                result.records.push_back(o.ieo);
                if (trace_out.is_open()) {
                    if (!header_written) {
                        write_trace_header(trace_out, o.ea_trace.directions,
                                           o.ea_trace.records.empty() ? 0 : o.ea_trace.records[0].genome.size());
                        header_written = true;
                    }
                    write_trace_rows(trace_out, next_to_flush, "ea", o.ea_trace);
                    write_trace_rows(trace_out, next_to_flush, "ieo", o.ieo_trace);
                    trace_out.flush();
                }
            } else {
                result.warnings.push_back(o.error);
            }
            o = TrialOutcome{};
            ++next_to_flush;
        }
    };

    auto worker = [&] {
        for (;;) {
            std::size_t trial = 0;
            {
                std::lock_guard lock(mutex);
                if (stopped || next_trial >= config.repeats) return;
                if (config.cancel && config.cancel->load()) {
                    stopped = true;
                    return;
                }
                trial = next_trial++;
            }
            auto outcome = run_trial(config, make_fitness, trial);
            std::lock_guard lock(mutex);
            outcomes[trial] = std::move(outcome);
            flush_ready();
        }
    };

    if (result.trial_parallelism == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < result.trial_parallelism; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    result.truncated = next_to_flush < config.repeats;
    if (result.truncated)
        result.warnings.push_back("run interrupted after " + std::to_string(next_to_flush) + " of " +
                                  std::to_string(config.repeats) + " trials");
    result.summary = compute_summary(result.records, &result.warnings);
    if (result.summary.completed_trials < config.repeats && !result.truncated)
        result.warnings.push_back("aggregates cover " + std::to_string(result.summary.completed_trials) +
                                  " completed trials");

    if (!config.output_dir.empty()) {
        write_file(config.output_dir / "result.json", to_json(result).dump(2) + "\n");
        write_file(config.output_dir / "report.txt", summarize(result));
    }
    return result;
}

// --- report -----------------------------------------------------------------

namespace {

std::string fmt(const char* format, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, value);
    return buf;
}

std::string p_text(const std::optional<double>& p) { return p ? fmt("%.4g", *p) : std::string("n/a"); }

std::string list_text(const std::vector<double>& values) {
    if (values.empty()) return "n/a";
    std::string out = "[";
    for (std::size_t i = 0; i < values.size(); ++i) out += (i ? " " : "") + fmt("%.3f", values[i]);
    return out + "]";
}

}  // namespace

std::string summarize(const ExperimentResult& result) {
    const auto& s = result.summary;
    std::ostringstream out;
    out << "Paired EA vs IEO experiment: " << (result.fitness.empty() ? "unnamed" : result.fitness) << ", "
        << s.completed_trials << " of " << result.repeats_requested << " trials, base seed "
        << result.base_seed << (result.truncated ? " [TRUNCATED]" : "") << "\n\n";

    char line[160];
    std::snprintf(line, sizeof line, "%5s  %-4s  %12s  %14s  %6s  %6s  %6s\n", "trial", "arm", "wall_ms", "best",
                  "conv", "evals", "skips");
    out << line;
    for (const auto& r : result.records) {
        std::snprintf(line, sizeof line, "%5zu  %-4s  %12.1f  %14.6g  %6zu  %6zu  %6zu\n", r.trial, to_string(r.arm),
                      r.wall_time_ms, r.best_objective, r.convergence_iteration, r.evaluations, r.skips);
        out << line;
    }
    out << "\n";
    out << "mean saving " << fmt("%.2f", 100.0 * s.mean_time_saving) << "%, max saving "
        << fmt("%.2f", 100.0 * s.max_time_saving) << "%\n";
    out << "max speedup " << fmt("%.2f", s.max_speedup) << "x\n";
    out << "skip rate " << fmt("%.4f", s.skip_rate) << "\n";
    out << "evaluations EA " << s.ea_evaluations << ", IEO " << s.ieo_evaluations << ", difference "
        << static_cast<long long>(s.ea_evaluations) - static_cast<long long>(s.ieo_evaluations)
        << ", total skips " << s.ieo_skips << "\n\n";
    out << "p-values            Wilcoxon    t-test\n";
    out << "  time              " << p_text(s.wilcoxon_time) << "    " << p_text(s.ttest_time) << "\n";
    out << "  convergence       " << p_text(s.wilcoxon_convergence) << "    " << p_text(s.ttest_convergence) << "\n";
    out << "  optimality        " << p_text(s.wilcoxon_optimality) << "    " << p_text(s.ttest_optimality) << "\n\n";
    out << "normalized wall time (EA max = 1)\n  EA  " << list_text(s.normalized_time_ea) << "\n  IEO "
        << list_text(s.normalized_time_ieo) << "\n";
    out << "normalized convergence iteration (EA max = 1)\n  EA  " << list_text(s.normalized_convergence_ea)
        << "\n  IEO " << list_text(s.normalized_convergence_ieo) << "\n";
    out << "normalized best objective (EA max = 1)\n  EA  " << list_text(s.normalized_best_ea) << "\n  IEO "
        << list_text(s.normalized_best_ieo) << "\n";
    if (!result.warnings.empty()) {
        out << "\nwarnings\n";
        for (const auto& w : result.warnings) out << "  - " << w << "\n";
    }
    return out.str();
}

// --- JSON -------------------------------------------------------------------

namespace {

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

std::optional<double> optional_from(const nlohmann::json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

/// JSON has no NaN; store it as null.
nlohmann::json number_json(double v) { return std::isnan(v) ? nlohmann::json() : nlohmann::json(v); }
double number_from(const nlohmann::json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

}  // namespace

nlohmann::json to_json(const ExperimentResult& result) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : result.records) {
        records.push_back({{"trial", r.trial},
                           {"arm", to_string(r.arm)},
                           {"seed", r.seed},
                           {"wall_time_ms", r.wall_time_ms},
                           {"best_objective", number_json(r.best_objective)},
                           {"convergence_iteration", r.convergence_iteration},
                           {"evaluations", r.evaluations},
                           {"skips", r.skips}});
    }
    const auto& s = result.summary;
    nlohmann::json summary = {
        {"completed_trials", s.completed_trials},
        {"time_saving", s.time_saving},
        {"mean_time_saving", s.mean_time_saving},
        {"max_time_saving", s.max_time_saving},
        {"max_speedup", s.max_speedup},
        {"skip_rate", s.skip_rate},
        {"ea_evaluations", s.ea_evaluations},
        {"ieo_evaluations", s.ieo_evaluations},
        {"ieo_skips", s.ieo_skips},
        {"p_values",
         {{"time", {{"wilcoxon", optional_json(s.wilcoxon_time)}, {"ttest", optional_json(s.ttest_time)}}},
          {"convergence",
           {{"wilcoxon", optional_json(s.wilcoxon_convergence)}, {"ttest", optional_json(s.ttest_convergence)}}},
          {"optimality",
           {{"wilcoxon", optional_json(s.wilcoxon_optimality)}, {"ttest", optional_json(s.ttest_optimality)}}}}},
        {"normalized",
         {{"time", {{"ea", s.normalized_time_ea}, {"ieo", s.normalized_time_ieo}}},
          {"convergence", {{"ea", s.normalized_convergence_ea}, {"ieo", s.normalized_convergence_ieo}}},
          {"best_objective", {{"ea", s.normalized_best_ea}, {"ieo", s.normalized_best_ieo}}}}},
    };
    return {{"schema_version", result.schema_version},
            {"fitness", result.fitness},
            {"repeats_requested", result.repeats_requested},
            {"base_seed", result.base_seed},
            {"trial_parallelism", result.trial_parallelism},
            {"truncated", result.truncated},
            {"records", records},
            {"summary", summary},
            {"warnings", result.warnings},
            {"metadata", result.metadata}};
}

ExperimentResult result_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("schema_version"))
        throw std::invalid_argument("not an experiment result document (no schema_version)");
    const int version = doc.at("schema_version").get<int>();
    if (version != kResultSchemaVersion)
        throw std::invalid_argument("result schema version " + std::to_string(version) +
                                    " does not match supported version " + std::to_string(kResultSchemaVersion));
    try {
        ExperimentResult r;
        r.schema_version = version;
        r.fitness = doc.at("fitness").get<std::string>();
        r.repeats_requested = doc.at("repeats_requested").get<std::size_t>();
        r.base_seed = doc.at("base_seed").get<std::uint64_t>();
        r.trial_parallelism = doc.at("trial_parallelism").get<std::size_t>();
        r.truncated = doc.at("truncated").get<bool>();
        for (const auto& j : doc.at("records")) {
            TrialRecord t;
            t.trial = j.at("trial").get<std::size_t>();
            t.arm = arm_from_string(j.at("arm").get<std::string>());
            t.seed = j.at("seed").get<std::uint64_t>();
            t.wall_time_ms = j.at("wall_time_ms").get<double>();
            t.best_objective = number_from(j.at("best_objective"));
            t.convergence_iteration = j.at("convergence_iteration").get<std::size_t>();
            t.evaluations = j.at("evaluations").get<std::size_t>();
            t.skips = j.at("skips").get<std::size_t>();
            r.records.push_back(t);
        }
        const auto& s = doc.at("summary");
        auto& out = r.summary;
        out.completed_trials = s.at("completed_trials").get<std::size_t>();
        out.time_saving = s.at("time_saving").get<std::vector<double>>();
        out.mean_time_saving = s.at("mean_time_saving").get<double>();
        out.max_time_saving = s.at("max_time_saving").get<double>();
        out.max_speedup = s.at("max_speedup").get<double>();
        out.skip_rate = s.at("skip_rate").get<double>();
        out.ea_evaluations = s.at("ea_evaluations").get<std::size_t>();
        out.ieo_evaluations = s.at("ieo_evaluations").get<std::size_t>();
        out.ieo_skips = s.at("ieo_skips").get<std::size_t>();
        const auto& p = s.at("p_values");
        out.wilcoxon_time = optional_from(p.at("time").at("wilcoxon"));
        out.ttest_time = optional_from(p.at("time").at("ttest"));
        out.wilcoxon_convergence = optional_from(p.at("convergence").at("wilcoxon"));
        out.ttest_convergence = optional_from(p.at("convergence").at("ttest"));
        out.wilcoxon_optimality = optional_from(p.at("optimality").at("wilcoxon"));
        out.ttest_optimality = optional_from(p.at("optimality").at("ttest"));
        const auto& n = s.at("normalized");
        out.normalized_time_ea = n.at("time").at("ea").get<std::vector<double>>();
        out.normalized_time_ieo = n.at("time").at("ieo").get<std::vector<double>>();
        out.normalized_convergence_ea = n.at("convergence").at("ea").get<std::vector<double>>();
        out.normalized_convergence_ieo = n.at("convergence").at("ieo").get<std::vector<double>>();
        out.normalized_best_ea = n.at("best_objective").at("ea").get<std::vector<double>>();
        out.normalized_best_ieo = n.at("best_objective").at("ieo").get<std::vector<double>>();
        r.warnings = doc.at("warnings").get<std::vector<std::string>>();
        r.metadata = doc.at("metadata");
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed result document: ") + e.what());
    }
}

}  // namespace ieo
