#include "ieo/trace_io.hpp"

#include <charconv>
#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <stdexcept>

#include "ieo/dataset.hpp"

namespace ieo {

std::string format_double(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return {buf, res.ptr};
}

void write_trace_header(std::ostream& out, const std::vector<Direction>& directions, std::size_t genes) {
    out << "trial,arm,solution_id,generation,decision";
    for (std::size_t i = 0; i < directions.size(); ++i)
        out << ",obj_" << i << (directions[i] == Direction::Minimize ? "_min" : "_max");
    out << ",cumulative_ms,eval_ms,parent1,parent2,p1,p2";
    for (std::size_t i = 0; i < genes; ++i) out << ",x_" << i;
    out << '\n';
}

void write_trace_rows(std::ostream& out, std::size_t trial, const std::string& arm, const RunTrace& trace) {
    for (const auto& r : trace.records) {
        out << trial << ',' << arm << ',' << r.id << ',' << r.generation << ',' << to_string(r.decision);
        for (std::size_t i = 0; i < trace.directions.size(); ++i) {
            out << ',';
            if (r.has_objectives()) out << format_double(r.objectives[i]);
        }
        out << ',' << format_double(r.cumulative_ms) << ',' << format_double(r.eval_ms) << ',';
        if (r.parent1) out << *r.parent1;
        out << ',';
        if (r.parent2) out << *r.parent2;
        out << ',';
        if (r.probability1) out << format_double(*r.probability1);
        out << ',';
        if (r.probability2) out << format_double(*r.probability2);
        for (double x : r.genome.values) out << ',' << format_double(x);
        out << '\n';
    }
}

namespace {

double parse_double(const std::string& cell, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw std::invalid_argument("trace line " + std::to_string(line) + ": bad number '" + cell + "'");
    return v;
}

std::uint64_t parse_uint(const std::string& cell, std::size_t line) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw std::invalid_argument("trace line " + std::to_string(line) + ": bad integer '" + cell + "'");
    return v;
}

}  // namespace

std::vector<LabeledTrace> read_trace_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("trace file is empty");
    const auto header = split_csv_line(line);
    const std::vector<std::string> leading{"trial", "arm", "solution_id", "generation", "decision"};
    if (header.size() < leading.size() || !std::equal(leading.begin(), leading.end(), header.begin()))
        throw std::invalid_argument("not a trace file: header must start with trial,arm,solution_id,generation,decision");

    std::vector<Direction> directions;
    std::size_t col = leading.size();
    while (col < header.size() && header[col].rfind("obj_", 0) == 0) {
        const auto& name = header[col];
        if (name.size() > 4 && name.ends_with("_min"))
            directions.push_back(Direction::Minimize);
        else if (name.ends_with("_max"))
            directions.push_back(Direction::Maximize);
        else
            throw std::invalid_argument("objective column '" + name + "' lacks a _min/_max suffix");
        ++col;
    }
    const std::vector<std::string> middle{"cumulative_ms", "eval_ms", "parent1", "parent2", "p1", "p2"};
    if (directions.empty() || header.size() < col + middle.size() ||
        !std::equal(middle.begin(), middle.end(), header.begin() + static_cast<std::ptrdiff_t>(col)))
        throw std::invalid_argument("trace header has unexpected columns");
    const std::size_t obj_col = leading.size();
    const std::size_t mid_col = col;
    const std::size_t gene_col = col + middle.size();

    std::vector<LabeledTrace> traces;
    std::map<std::pair<std::size_t, std::string>, std::size_t> index;
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw std::invalid_argument("trace line " + std::to_string(line_number) + " has " +
                                        std::to_string(cells.size()) + " fields, expected " +
                                        std::to_string(header.size()));
        const auto trial = static_cast<std::size_t>(parse_uint(cells[0], line_number));
        const auto key = std::make_pair(trial, cells[1]);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, traces.size()).first;
            traces.push_back({trial, cells[1], {}});
            traces.back().trace.directions = directions;
        }
        auto& trace = traces[it->second].trace;

        TraceRecord r;
        r.id = parse_uint(cells[2], line_number);
        r.generation = static_cast<std::size_t>(parse_uint(cells[3], line_number));
        r.decision = decision_from_string(cells[4]);
        if (!cells[obj_col].empty())
            for (std::size_t i = 0; i < directions.size(); ++i)
                r.objectives.push_back(parse_double(cells[obj_col + i], line_number));
        r.cumulative_ms = parse_double(cells[mid_col], line_number);
        r.eval_ms = parse_double(cells[mid_col + 1], line_number);
        if (!cells[mid_col + 2].empty()) r.parent1 = parse_uint(cells[mid_col + 2], line_number);
        if (!cells[mid_col + 3].empty()) r.parent2 = parse_uint(cells[mid_col + 3], line_number);
        if (!cells[mid_col + 4].empty()) r.probability1 = parse_double(cells[mid_col + 4], line_number);
        if (!cells[mid_col + 5].empty()) r.probability2 = parse_double(cells[mid_col + 5], line_number);
        for (std::size_t i = gene_col; i < cells.size(); ++i)
            r.genome.values.push_back(parse_double(cells[i], line_number));

        if (r.decision == Decision::Skipped)
            ++trace.skips_count;
        else
            ++trace.evaluations_count;
        trace.total_wall_ms = std::max(trace.total_wall_ms, r.cumulative_ms);
        trace.records.push_back(std::move(r));
    }
    return traces;
}

std::vector<LabeledTrace> read_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open trace '" + path.string() + "'");
    return read_trace_csv(in);
}

}  // namespace ieo
