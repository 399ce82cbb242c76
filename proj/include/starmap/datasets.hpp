#pragma once

#include "starmap/core.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace starmap {

/// Error while reading or writing a data file; the message carries file/row/column context.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A factorized label column: values are dense in [0, names.size()).
struct LabelColumn {
    std::string name;
    std::vector<int> values;
    std::vector<std::string> names;  // original text for each code

    std::size_t n_classes() const noexcept { return names.size(); }
};

struct LabeledDataset {
    DataMatrix X;
    std::vector<std::string> feature_names;
    std::vector<LabelColumn> labels;  // coarsest first when the data are hierarchical

    /// Label column by name, or nullptr.
    const LabelColumn* label(const std::string& name) const;
};

struct SynthSpec {
    std::array<double, 3> spread{10.0, 2.0, 0.4};  // ring radii per level, strictly decreasing
    double noise_sd = 0.08;
};

/**
 * Three-level hierarchy in 2-D: 5 large clusters on a ring, 5 intermediate
 * clusters on a ring around each, 3 small clusters around each of those, and
 * 100 Gaussian points per small cluster (7500 points). Label columns
 * level0/level1/level2 have 5, 25 and 75 classes, and
 * level1 = 5 * level0 + m, level2 = 3 * level1 + s.
 */
LabeledDataset synth_hierarchy(std::uint64_t seed, const SynthSpec& spec = {});

/**
 * Reads a comma-separated table. Every column listed in `label_cols` (by
 * header name, or by 0-based index) becomes a label column; all other
 * columns must parse as finite reals. Labels are factorized in sorted order
 * (numerically when every entry is an integer).
 */
LabeledDataset load_csv(const std::filesystem::path& path, bool has_header,
                        const std::vector<std::string>& label_cols = {});

/// Header names of a CSV file (first line split on commas).
std::vector<std::string> read_csv_header(const std::filesystem::path& path);

/// Writes features then label columns (label text from each column's name table).
void save_csv(const std::filesystem::path& path, const LabeledDataset& data);

/// Shortest decimal text that parses back to exactly `v` (at most 17 significant digits).
std::string format_real(double v);

/// Path of the companion star file: "<path>.stars.csv".
std::filesystem::path stars_path_for(const std::filesystem::path& path);

/**
 * Writes `y0..y{q-1}[,label][,anchor]`. When `stars` is given, also writes
 * `s0..s{q-1},anchor_id` to `stars_out` (default stars_path_for(path)).
 */
void save_embedding_csv(const std::filesystem::path& path, const DataMatrix& Y, const std::vector<int>* labels = nullptr,
                        const DataMatrix* stars = nullptr, const std::vector<std::uint32_t>* assignment = nullptr,
                        const std::optional<std::filesystem::path>& stars_out = std::nullopt);

}  // namespace starmap
