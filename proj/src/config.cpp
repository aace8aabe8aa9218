#include "ieo/config.hpp"

#include <chrono>
#include <fstream>
#include <set>

#include "ieo/dataset.hpp"

namespace ieo {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& key, const std::string& message) {
    throw ConfigError(key + ": " + message);
}

void reject_unknown(const json& section, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!section.is_object()) fail(path, "must be an object");
    const std::set<std::string> known(allowed.begin(), allowed.end());
    for (const auto& [key, value] : section.items())
        if (!known.count(key)) fail(path.empty() ? key : path + "." + key, "unknown key");
}

template <typename T>
T get(const json& section, const std::string& path, const char* key, T fallback) {
    if (!section.contains(key)) return fallback;
    const auto& v = section.at(key);
    const std::string full = path.empty() ? key : path + "." + key;
    if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) fail(full, "expected true or false");
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) fail(full, "expected a string");
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) fail(full, "expected a number");
    } else {
        if (!v.is_number_integer() || (v.is_number_integer() && v.get<long long>() < 0))
            fail(full, "expected a non-negative integer");
    }
    return v.get<T>();
}

template <typename T>
T require(const json& section, const std::string& path, const char* key) {
    if (!section.contains(key)) fail(path.empty() ? key : path + "." + key, "missing required key");
    return get<T>(section, path, key, T{});
}

GaConfig parse_ga(const json& doc) {
    GaConfig ga;
    if (doc.is_null()) return ga;
    reject_unknown(doc, "ga",
                   {"population_size", "generations", "crossover_probability", "mutation_probability", "eta_c",
                    "eta_m", "tournament_size", "seed", "elitist_survival", "parallel_evaluation"});
    ga.population_size = get<std::size_t>(doc, "ga", "population_size", ga.population_size);
    ga.generations = get<std::size_t>(doc, "ga", "generations", ga.generations);
    ga.crossover_probability = get<double>(doc, "ga", "crossover_probability", ga.crossover_probability);
    if (doc.contains("mutation_probability") && !doc.at("mutation_probability").is_null())
        ga.mutation_probability = get<double>(doc, "ga", "mutation_probability", 0.0);
    ga.eta_c = get<double>(doc, "ga", "eta_c", ga.eta_c);
    ga.eta_m = get<double>(doc, "ga", "eta_m", ga.eta_m);
    ga.tournament_size = get<std::size_t>(doc, "ga", "tournament_size", ga.tournament_size);
    ga.seed = get<std::uint64_t>(doc, "ga", "seed", ga.seed);
    ga.elitist_survival = get<bool>(doc, "ga", "elitist_survival", ga.elitist_survival);
    ga.parallel_evaluation = get<bool>(doc, "ga", "parallel_evaluation", ga.parallel_evaluation);
    return ga;
}

GbtParams parse_estimator(const json& doc) {
    GbtParams p;
    if (doc.is_null()) return p;
    const std::string path = "ieo.estimator";
    reject_unknown(doc, path, {"n_trees", "max_depth", "learning_rate", "l2", "min_samples_leaf"});
    p.n_trees = get<std::size_t>(doc, path, "n_trees", p.n_trees);
    p.max_depth = get<std::size_t>(doc, path, "max_depth", p.max_depth);
    p.learning_rate = get<double>(doc, path, "learning_rate", p.learning_rate);
    p.l2 = get<double>(doc, path, "l2", p.l2);
    p.min_samples_leaf = get<std::size_t>(doc, path, "min_samples_leaf", p.min_samples_leaf);
    return p;
}

/// Turns validate()'s "section.key must ..." messages into ConfigError.
template <typename F>
void checked(F&& f) {
    try {
        f();
    } catch (const std::invalid_argument& e) {
        const std::string message = e.what();
        const auto space = message.find(' ');
        if (space == std::string::npos) throw ConfigError(message);
        throw ConfigError(message.substr(0, space) + ":" + message.substr(space));
    }
}

}  // namespace

ParameterSpace parse_space(const json& doc) {
    if (!doc.is_array()) fail("space", "expected an array of parameter objects");
    std::vector<ParameterSpec> specs;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& item = doc[i];
        const std::string path = "space[" + std::to_string(i) + "]";
        reject_unknown(item, path, {"name", "kind", "lower", "upper", "categories"});
        const auto name = require<std::string>(item, path, "name");
        const auto kind_text = get<std::string>(item, path, "kind", "continuous");
        ParamKind kind{};
        try {
            kind = param_kind_from_string(kind_text);
        } catch (const std::invalid_argument& e) {
            fail(path + ".kind", e.what());
        }
        if (kind == ParamKind::Categorical) {
            if (!item.contains("categories") || !item.at("categories").is_array())
                fail(path + ".categories", "categorical parameters need a list of labels");
            std::vector<std::string> labels;
            for (const auto& l : item.at("categories")) {
                if (!l.is_string()) fail(path + ".categories", "labels must be strings");
                labels.push_back(l.get<std::string>());
            }
            specs.push_back(ParameterSpec::categorical(name, std::move(labels)));
        } else {
            if (item.contains("categories")) fail(path + ".categories", "only valid for categorical parameters");
            ParameterSpec spec;
            spec.name = name;
            spec.kind = kind;
            spec.lower = require<double>(item, path, "lower");
            spec.upper = require<double>(item, path, "upper");
            specs.push_back(std::move(spec));
        }
    }
    try {
        return ParameterSpace(std::move(specs));
    } catch (const std::invalid_argument& e) {
        fail("space", e.what());
    }
}

json space_to_json(const ParameterSpace& space) {
    json out = json::array();
    for (const auto& s : space.specs()) {
        json item = {{"name", s.name}, {"kind", to_string(s.kind)}};
        if (s.kind == ParamKind::Categorical)
            item["categories"] = s.categories;
        else {
            item["lower"] = s.lower;
            item["upper"] = s.upper;
        }
        out.push_back(std::move(item));
    }
    return out;
}

ToolConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
    reject_unknown(doc, "", {"space", "fitness", "ga", "ieo", "experiment"});
    ToolConfig config;
    if (doc.contains("space")) config.space = parse_space(doc.at("space"));

    if (!doc.contains("fitness")) fail("fitness", "missing required section");
    const auto& f = doc.at("fitness");
    if (!f.is_object()) fail("fitness", "must be an object");
    const auto type = require<std::string>(f, "fitness", "type");
    json fitness;
    if (type == "synthetic") {
        reject_unknown(f, "fitness", {"type", "name", "dimension", "delay_ms"});
        const auto name = require<std::string>(f, "fitness", "name");
        std::size_t dimension = config.space ? config.space->size() : 0;
        dimension = get<std::size_t>(f, "fitness", "dimension", dimension);
        if (dimension == 0) fail("fitness.dimension", "missing or zero");
        if (config.space && config.space->size() != dimension)
            fail("fitness.dimension", "does not match the " + std::to_string(config.space->size()) +
                                          "-dimensional space");
        fitness = {{"type", type}, {"name", name}, {"dimension", dimension},
                   {"delay_ms", get<double>(f, "fitness", "delay_ms", 0.0)}};
    } else if (type == "knn") {
        reject_unknown(f, "fitness", {"type", "dataset", "label_column", "split_seed", "delay_ms"});
        if (config.space) fail("space", "the knn fitness defines its own parameter space");
        auto dataset = std::filesystem::path(require<std::string>(f, "fitness", "dataset"));
        if (dataset.is_relative()) dataset = base_dir / dataset;
        fitness = {{"type", type},
                   {"dataset", std::filesystem::absolute(dataset).lexically_normal().string()},
                   {"label_column", get<std::string>(f, "fitness", "label_column", "label")},
                   {"split_seed", get<std::uint64_t>(f, "fitness", "split_seed", 0)},
                   {"delay_ms", get<double>(f, "fitness", "delay_ms", 0.0)}};
    } else if (type == "command") {
        reject_unknown(f, "fitness", {"type", "command", "directions", "concurrency_safe"});
        if (!config.space) fail("space", "required by the command fitness");
        json directions = json::array({"maximize"});
        if (f.contains("directions")) {
            directions = f.at("directions");
            if (!directions.is_array() || directions.empty()) fail("fitness.directions", "expected a non-empty list");
            for (const auto& d : directions) {
                try {
                    direction_from_string(d.is_string() ? d.get<std::string>() : "");
                } catch (const std::invalid_argument& e) {
                    fail("fitness.directions", e.what());
                }
            }
        }
        fitness = {{"type", type},
                   {"command", require<std::string>(f, "fitness", "command")},
                   {"directions", directions},
                   {"concurrency_safe", get<bool>(f, "fitness", "concurrency_safe", false)}};
    } else {
        fail("fitness.type", "unknown fitness type '" + type + "' (expected synthetic, knn or command)");
    }
    if (fitness.contains("delay_ms") && fitness["delay_ms"].get<double>() < 0.0)
        fail("fitness.delay_ms", "must be non-negative");
    config.fitness = std::move(fitness);

    config.ieo.ga = parse_ga(doc.value("ga", json()));
    if (doc.contains("ieo")) {
        const auto& s = doc.at("ieo");
        reject_unknown(s, "ieo", {"warmup_fraction", "retrain_interval_generations", "decision_threshold", "estimator"});
        config.ieo.warmup_fraction = get<double>(s, "ieo", "warmup_fraction", config.ieo.warmup_fraction);
        config.ieo.retrain_interval_generations =
            get<std::size_t>(s, "ieo", "retrain_interval_generations", config.ieo.retrain_interval_generations);
        config.ieo.decision_threshold = get<double>(s, "ieo", "decision_threshold", config.ieo.decision_threshold);
        config.ieo.estimator = parse_estimator(s.value("estimator", json()));
    }
    if (doc.contains("experiment")) {
        const auto& s = doc.at("experiment");
        reject_unknown(s, "experiment", {"repeats", "base_seed", "trial_parallelism"});
        config.experiment.repeats = get<std::size_t>(s, "experiment", "repeats", config.experiment.repeats);
        config.experiment.base_seed = get<std::uint64_t>(s, "experiment", "base_seed", config.experiment.base_seed);
        config.experiment.trial_parallelism =
            get<std::size_t>(s, "experiment", "trial_parallelism", config.experiment.trial_parallelism);
        if (config.experiment.repeats == 0) fail("experiment.repeats", "must be at least 1");
        if (config.experiment.trial_parallelism == 0) fail("experiment.trial_parallelism", "must be at least 1");
    }
    checked([&] { validate(config.ieo); });
    return config;
}

LoadedConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ConfigError("config file '" + path.string() + "' is not valid JSON");
    LoadedConfig loaded;
    if (doc.is_object() && doc.contains("manifest_version")) {
        const int version = doc.at("manifest_version").get<int>();
        if (version != kManifestVersion)
            throw ConfigError("manifest_version: " + std::to_string(version) + " is not supported (expected " +
                              std::to_string(kManifestVersion) + ")");
        if (!doc.contains("config")) throw ConfigError("config: manifest has no config snapshot");
        loaded.config = parse_config(doc.at("config"), path.parent_path());
        loaded.manifest = std::move(doc);
    } else {
        loaded.config = parse_config(doc, path.parent_path());
    }
    return loaded;
}

json config_to_json(const ToolConfig& config) {
    const auto& ga = config.ieo.ga;
    const auto& est = config.ieo.estimator;
    json out = {
        {"fitness", config.fitness},
        {"ga",
         {{"population_size", ga.population_size},
          {"generations", ga.generations},
          {"crossover_probability", ga.crossover_probability},
          {"mutation_probability", ga.mutation_probability ? json(*ga.mutation_probability) : json()},
          {"eta_c", ga.eta_c},
          {"eta_m", ga.eta_m},
          {"tournament_size", ga.tournament_size},
          {"seed", ga.seed},
          {"elitist_survival", ga.elitist_survival},
          {"parallel_evaluation", ga.parallel_evaluation}}},
        {"ieo",
         {{"warmup_fraction", config.ieo.warmup_fraction},
          {"retrain_interval_generations", config.ieo.retrain_interval_generations},
          {"decision_threshold", config.ieo.decision_threshold},
          {"estimator",
           {{"n_trees", est.n_trees},
            {"max_depth", est.max_depth},
            {"learning_rate", est.learning_rate},
            {"l2", est.l2},
            {"min_samples_leaf", est.min_samples_leaf}}}}},
        {"experiment",
         {{"repeats", config.experiment.repeats},
          {"base_seed", config.experiment.base_seed},
          {"trial_parallelism", config.experiment.trial_parallelism}}},
    };
    if (config.space) out["space"] = space_to_json(*config.space);
    return out;
}

FitnessPtr make_fitness(const ToolConfig& config) {
    const auto& f = config.fitness;
    const auto type = f.at("type").get<std::string>();
    FitnessPtr fitness;
    if (type == "synthetic") {
        const auto name = f.at("name").get<std::string>();
        fitness = config.space ? synthetic_fitness(name, *config.space)
                               : synthetic_fitness(name, f.at("dimension").get<std::size_t>());
    } else if (type == "knn") {
        auto loaded = load_csv(f.at("dataset").get<std::string>(), f.at("label_column").get<std::string>());
        fitness = knn_tuning_fitness(std::move(loaded.dataset), f.at("split_seed").get<std::uint64_t>());
    } else {
        std::vector<Direction> directions;
        for (const auto& d : f.at("directions")) directions.push_back(direction_from_string(d.get<std::string>()));
        fitness = std::make_shared<CommandFitness>(f.at("command").get<std::string>(), *config.space,
                                                   std::move(directions), f.at("concurrency_safe").get<bool>());
    }
    const double delay_ms = f.value("delay_ms", 0.0);
    if (delay_ms > 0.0)
        fitness = delay_wrapper(std::move(fitness),
                                std::chrono::microseconds(static_cast<long long>(delay_ms * 1000.0 + 0.5)));
    return fitness;
}

}  // namespace ieo
