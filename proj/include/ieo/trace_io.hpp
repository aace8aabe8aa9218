#pragma once

/// @file trace_io.hpp
/// @brief Trace CSV format.
///
/// Columns, in order:
///   trial, arm, solution_id, generation, decision,
///   obj_0_<min|max> .. obj_{d-1}_<min|max>, cumulative_ms,
///   eval_ms, parent1, parent2, p1, p2, x_0 .. x_{n-1}
/// Missing values (no objectives, no parents, no probabilities) are empty
/// cells. Reals are written in shortest round-trip form.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ieo/evolution.hpp"

namespace ieo {

struct LabeledTrace {
    std::size_t trial = 0;
    std::string arm;
    RunTrace trace;
};

/// Writes the header row for a trace of `objectives` objectives and
/// `genes` genes.
void write_trace_header(std::ostream& out, const std::vector<Direction>& directions, std::size_t genes);
void write_trace_rows(std::ostream& out, std::size_t trial, const std::string& arm, const RunTrace& trace);

/// Reads every (trial, arm) group back. Per-generation bests, trainings and
/// total wall time are not stored; counts and directions are restored.
std::vector<LabeledTrace> read_trace_csv(std::istream& in);
std::vector<LabeledTrace> read_trace_csv(const std::filesystem::path& path);

/// Formats a double in shortest round-trip form.
std::string format_double(double value);

}  // namespace ieo
