#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace ieo {

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense numeric table with an integer class label per row.
/// Labels run 0..C-1 and C >= 2.
struct TabularDataset {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> features;  // row-major, rows * cols
    std::vector<int> labels;
    std::vector<std::string> feature_names;
    std::vector<std::string> class_names;  // index = encoded label

    const double* row(std::size_t r) const { return features.data() + r * cols; }
    std::size_t class_count() const { return class_names.size(); }
    bool operator==(const TabularDataset&) const = default;
};

struct IngestionReport {
    std::size_t rows_read = 0;
    std::size_t rows_kept = 0;
    std::size_t rows_dropped = 0;
};

struct LoadedDataset {
    TabularDataset dataset;
    IngestionReport report;
};

/// Reads a comma-separated file with a header row. Rows with a missing cell
/// ("", "?", "NA", "NaN") are dropped, features are min-max scaled per column
/// (a constant column becomes all zeros) and the distinct label strings are
/// sorted (numerically if all parse as numbers) and encoded 0..C-1.
/// Throws DatasetError for unreadable files, a missing label column,
/// non-numeric feature cells or fewer than two classes.
LoadedDataset load_csv(const std::filesystem::path& path, const std::string& label_column);

/// Splits one CSV line honoring double quotes.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace ieo
