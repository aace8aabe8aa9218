#include "ieo/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>

namespace ieo {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

bool is_missing(const std::string& cell) {
    return cell.empty() || cell == "?" || cell == "NA" || cell == "NaN" || cell == "nan";
}

std::optional<double> parse_number(const std::string& cell) {
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = cell.data() + cell.size();
    if (begin != end && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return value;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(trim(cell));
            cell.clear();
        } else {
            cell += c;
        }
    }
    cells.push_back(trim(cell));
    return cells;
}

LoadedDataset load_csv(const std::filesystem::path& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open dataset '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line)) throw DatasetError("dataset '" + path.string() + "' is empty");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    const auto header = split_csv_line(line);
    const auto label_it = std::find(header.begin(), header.end(), label_column);
    if (label_it == header.end())
        throw DatasetError("label column '" + label_column + "' not found in '" + path.string() + "'");
    const auto label_index = static_cast<std::size_t>(label_it - header.begin());

    LoadedDataset out;
    auto& ds = out.dataset;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (c != label_index) ds.feature_names.push_back(header[c]);
    ds.cols = ds.feature_names.size();
    if (ds.cols == 0) throw DatasetError("dataset '" + path.string() + "' has no feature columns");

    std::vector<std::string> raw_labels;
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim(line).empty()) continue;
        ++out.report.rows_read;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw DatasetError(path.string() + ":" + std::to_string(line_number) + ": expected " +
                               std::to_string(header.size()) + " fields, found " +
                               std::to_string(cells.size()));
        if (std::any_of(cells.begin(), cells.end(), is_missing)) {
            ++out.report.rows_dropped;
            continue;
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c == label_index) continue;
            const auto value = parse_number(cells[c]);
            if (!value)
                throw DatasetError(path.string() + ":" + std::to_string(line_number) +
                                   ": non-numeric value '" + cells[c] + "' in column '" +
                                   header[c] + "'");
            ds.features.push_back(*value);
        }
        raw_labels.push_back(cells[label_index]);
        ++out.report.rows_kept;
    }
    ds.rows = out.report.rows_kept;

    // Distinct labels, numerically ordered when every label is a number.
    std::vector<std::string> distinct(raw_labels.begin(), raw_labels.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    const bool numeric = std::all_of(distinct.begin(), distinct.end(),
                                     [](const std::string& s) { return parse_number(s).has_value(); });
    if (numeric)
        std::stable_sort(distinct.begin(), distinct.end(), [](const auto& a, const auto& b) {
            return *parse_number(a) < *parse_number(b);
        });
    if (distinct.size() < 2)
        throw DatasetError("dataset '" + path.string() + "' has fewer than 2 classes after cleaning");
    std::map<std::string, int> code;
    for (std::size_t i = 0; i < distinct.size(); ++i) code[distinct[i]] = static_cast<int>(i);
    ds.class_names = distinct;
    ds.labels.reserve(raw_labels.size());
    for (const auto& l : raw_labels) ds.labels.push_back(code.at(l));

    for (std::size_t c = 0; c < ds.cols; ++c) {
        double lo = ds.features[c];
        double hi = lo;
        for (std::size_t r = 0; r < ds.rows; ++r) {
            lo = std::min(lo, ds.features[r * ds.cols + c]);
            hi = std::max(hi, ds.features[r * ds.cols + c]);
        }
        const double range = hi - lo;
        for (std::size_t r = 0; r < ds.rows; ++r) {
            double& v = ds.features[r * ds.cols + c];
            v = range > 0.0 ? (v - lo) / range : 0.0;
        }
    }
    return out;
}

}  // namespace ieo
