#include "ieo/objectives.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <thread>

#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "ieo/knn.hpp"

namespace ieo {

namespace {

using Formula = double (*)(std::span<const double>);

double sphere(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

double rastrigin(std::span<const double> x) {
    double s = 10.0 * static_cast<double>(x.size());
    for (double v : x) s += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v);
    return s;
}

double ackley(std::span<const double> x) {
    const double n = static_cast<double>(x.size());
    double sq = 0.0;
    double cs = 0.0;
    for (double v : x) {
        sq += v * v;
        cs += std::cos(2.0 * std::numbers::pi * v);
    }
    const double value = -20.0 * std::exp(-0.2 * std::sqrt(sq / n)) - std::exp(cs / n) + 20.0 +
                         std::numbers::e;
    // exp(1) round-off leaves ~4e-16 at the optimum.
    return std::abs(value) < 1e-14 ? 0.0 : value;
}

double rosenbrock(std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double a = x[i + 1] - x[i] * x[i];
        const double b = 1.0 - x[i];
        s += 100.0 * a * a + b * b;
    }
    return s;
}

class SyntheticFitness final : public FitnessFunction {
public:
    SyntheticFitness(std::string name, Formula formula, ParameterSpace space)
        : name_(std::move(name)), formula_(formula), space_(std::move(space)) {}

    ObjectiveVector evaluate(const Genome& genome) const override {
        return {{formula_(genome.values)}, {Direction::Minimize}};
    }
    const ParameterSpace& space() const override { return space_; }
    std::vector<Direction> directions() const override { return {Direction::Minimize}; }
    std::string name() const override { return name_; }

private:
    std::string name_;
    Formula formula_;
    ParameterSpace space_;
};

ParameterSpace box(std::size_t dimension, double lower, double upper) {
    std::vector<ParameterSpec> specs;
    for (std::size_t i = 0; i < dimension; ++i)
        specs.push_back(ParameterSpec::continuous("x" + std::to_string(i), lower, upper));
    return ParameterSpace(std::move(specs));
}

class DelayedFitness final : public FitnessFunction {
public:
    DelayedFitness(FitnessPtr inner, std::chrono::microseconds delay)
        : inner_(std::move(inner)), delay_(delay) {}

    ObjectiveVector evaluate(const Genome& genome) const override {
        auto value = inner_->evaluate(genome);
        if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
        return value;
    }
    const ParameterSpace& space() const override { return inner_->space(); }
    std::vector<Direction> directions() const override { return inner_->directions(); }
    bool concurrency_safe() const override { return inner_->concurrency_safe(); }
    std::string name() const override { return inner_->name(); }

private:
    FitnessPtr inner_;
    std::chrono::microseconds delay_;
};

}  // namespace

FitnessPtr synthetic_fitness(const std::string& name, std::size_t dimension) {
    if (dimension == 0) throw ConfigError("benchmark dimension must be at least 1");
    if (name == "sphere") return std::make_shared<SyntheticFitness>(name, sphere, box(dimension, -5.12, 5.12));
    if (name == "rastrigin")
        return std::make_shared<SyntheticFitness>(name, rastrigin, box(dimension, -5.12, 5.12));
    if (name == "ackley")
        return std::make_shared<SyntheticFitness>(name, ackley, box(dimension, -32.768, 32.768));
    if (name == "rosenbrock")
        return std::make_shared<SyntheticFitness>(name, rosenbrock, box(dimension, -5.0, 10.0));
    throw ConfigError("unknown benchmark '" + name +
                      "' (expected sphere, rastrigin, ackley or rosenbrock)");
}

FitnessPtr synthetic_fitness(const std::string& name, ParameterSpace space) {
    for (const auto& spec : space.specs())
        if (spec.kind != ParamKind::Continuous)
            throw ConfigError("benchmark '" + name + "' needs continuous dimensions ('" + spec.name + "' is " +
                              to_string(spec.kind) + ")");
    const Formula formula = name == "sphere"       ? sphere
                            : name == "rastrigin"  ? rastrigin
                            : name == "ackley"     ? ackley
                            : name == "rosenbrock" ? rosenbrock
                                                   : nullptr;
    if (!formula)
        throw ConfigError("unknown benchmark '" + name + "' (expected sphere, rastrigin, ackley or rosenbrock)");
    return std::make_shared<SyntheticFitness>(name, formula, std::move(space));
}

FitnessPtr delay_wrapper(FitnessPtr inner, std::chrono::microseconds delay) {
    if (delay.count() < 0) throw ConfigError("delay must be non-negative");
    return std::make_shared<DelayedFitness>(std::move(inner), delay);
}

// --- k-NN tuning --------------------------------------------------------------

namespace {

ParameterSpace knn_space() {
    return ParameterSpace({
        ParameterSpec::integer("k", 1, 25),
        ParameterSpec::categorical("weighting", {"uniform", "inverse-distance"}),
        ParameterSpec::continuous("p", 1.0, 3.0),
    });
}

}  // namespace

KnnTuningFitness::KnnTuningFitness(TabularDataset dataset, std::uint64_t split_seed)
    : data_(std::move(dataset)), space_(knn_space()) {
    if (data_.rows < 4 || data_.class_count() < 2)
        throw DatasetError("k-NN tuning needs at least 4 rows and 2 classes");
    Rng rng(split_seed);
    for (std::size_t c = 0; c < data_.class_count(); ++c) {
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < data_.rows; ++r)
            if (data_.labels[r] == static_cast<int>(c)) rows.push_back(r);
        for (std::size_t i = rows.size(); i > 1; --i) std::swap(rows[i - 1], rows[rng.index(i)]);
        auto n_train = static_cast<std::size_t>(std::llround(0.7 * static_cast<double>(rows.size())));
        if (rows.size() >= 2) n_train = std::clamp<std::size_t>(n_train, 1, rows.size() - 1);
        for (std::size_t i = 0; i < rows.size(); ++i)
            (i < n_train ? train_rows_ : test_rows_).push_back(rows[i]);
    }
    std::sort(train_rows_.begin(), train_rows_.end());
    std::sort(test_rows_.begin(), test_rows_.end());
    if (train_rows_.size() < 2 || test_rows_.empty())
        throw DatasetError("stratified split left an empty partition");
}

KnnGenome KnnTuningFitness::decode_genome(const Genome& genome) const {
    const auto values = decode(genome, space_);
    KnnGenome g;
    g.k = static_cast<std::size_t>(values[0]);
    // k must leave at least one other training row out of the neighbourhood.
    g.k = std::clamp<std::size_t>(g.k, 1, train_rows_.size() - 1);
    g.inverse_distance = values[1] == 1.0;
    g.p = values[2];
    return g;
}

ObjectiveVector KnnTuningFitness::evaluate(const Genome& genome) const {
    const auto g = decode_genome(genome);
    std::vector<double> x;
    std::vector<int> y;
    x.reserve(train_rows_.size() * data_.cols);
    for (auto r : train_rows_) {
        x.insert(x.end(), data_.row(r), data_.row(r) + data_.cols);
        y.push_back(data_.labels[r]);
    }
    const KnnClassifier knn(x, data_.cols, y, data_.class_count());
    std::size_t correct = 0;
    for (auto r : test_rows_)
        if (knn.predict({data_.row(r), data_.cols}, {g.k, g.inverse_distance, g.p}) == data_.labels[r])
            ++correct;
    return {{static_cast<double>(correct) / static_cast<double>(test_rows_.size())},
            {Direction::Maximize}};
}

FitnessPtr knn_tuning_fitness(TabularDataset dataset, std::uint64_t split_seed) {
    return std::make_shared<KnnTuningFitness>(std::move(dataset), split_seed);
}

// --- external command -------------------------------------------------------

CommandFitness::CommandFitness(std::string command, ParameterSpace space,
                               std::vector<Direction> directions, bool concurrency_safe)
    : command_(std::move(command)),
      space_(std::move(space)),
      directions_(std::move(directions)),
      concurrency_safe_(concurrency_safe) {
    if (command_.empty()) throw ConfigError("fitness command must not be empty");
    if (directions_.empty()) throw ConfigError("command fitness needs at least one objective");
}

ObjectiveVector CommandFitness::evaluate(const Genome& genome) const {
    const auto values = decode(genome, space_);
    nlohmann::json request = nlohmann::json::object();
    for (std::size_t i = 0; i < space_.size(); ++i) {
        const auto& spec = space_[i];
        if (spec.kind == ParamKind::Categorical)
            request[spec.name] = spec.categories[static_cast<std::size_t>(values[i])];
        else if (spec.kind == ParamKind::Integer)
            request[spec.name] = static_cast<long long>(values[i]);
        else
            request[spec.name] = values[i];
    }

    char input_path[] = "/tmp/ieo-fitness-XXXXXX";
    const int fd = ::mkstemp(input_path);
    if (fd < 0) throw std::runtime_error("cannot create temporary input file");
    const auto payload = request.dump() + "\n";
    const bool wrote = ::write(fd, payload.data(), payload.size()) == static_cast<ssize_t>(payload.size());
    ::close(fd);
    if (!wrote) {
        std::remove(input_path);
        throw std::runtime_error("cannot write fitness request");
    }

    const std::string shell = "(" + command_ + ") < '" + input_path + "'";
    FILE* pipe = ::popen(shell.c_str(), "r");
    if (!pipe) {
        std::remove(input_path);
        throw std::runtime_error("cannot spawn fitness command");
    }
    std::string output;
    char buffer[4096];
    while (std::size_t n = std::fread(buffer, 1, sizeof buffer, pipe)) output.append(buffer, n);
    const int status = ::pclose(pipe);
    std::remove(input_path);
    if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0)
        throw std::runtime_error("fitness command exited with status " +
                                 std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1));

    const auto reply = nlohmann::json::parse(output, nullptr, false);
    if (reply.is_discarded() || !reply.is_object() || !reply.contains("objectives") ||
        !reply["objectives"].is_array())
        throw std::runtime_error("fitness command did not print {\"objectives\": [...]}");
    std::vector<double> objectives;
    for (const auto& v : reply["objectives"]) {
        if (!v.is_number()) throw std::runtime_error("fitness command returned a non-numeric objective");
        objectives.push_back(v.get<double>());
    }
    if (objectives.size() != directions_.size())
        throw std::runtime_error("fitness command returned " + std::to_string(objectives.size()) +
                                 " objectives, expected " + std::to_string(directions_.size()));
    return {std::move(objectives), directions_};
}

}  // namespace ieo
