#include "starmap/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>

namespace starmap {

const LabelColumn* LabeledDataset::label(const std::string& name) const {
    for (const auto& col : labels) {
        if (col.name == name) {
            return &col;
        }
    }
    return nullptr;
}

LabeledDataset synth_hierarchy(std::uint64_t seed, const SynthSpec& spec) {
    const auto& r = spec.spread;
    if (!(r[0] > r[1] && r[1] > r[2] && r[2] > 0.0)) {
        throw InvalidArgument("synth_hierarchy: spreads must be strictly decreasing and positive");
    }
    if (!(spec.noise_sd >= 0.0)) {
        throw InvalidArgument("synth_hierarchy: noise_sd must be nonnegative");
    }
    constexpr int n_large = 5, n_mid = 5, n_small = 3, per_small = 100;
    constexpr double tau = 2.0 * std::numbers::pi;

    Rng rng(seed);
    const std::size_t n = n_large * n_mid * n_small * per_small;
    std::vector<double> values;
    values.reserve(2 * n);
    LabeledDataset out;
    out.feature_names = {"x0", "x1"};
    out.labels = {{"level0", {}, {}}, {"level1", {}, {}}, {"level2", {}, {}}};
    for (auto& col : out.labels) {
        col.values.reserve(n);
    }

    for (int c = 0; c < n_large; ++c) {
        const double a0 = tau * c / n_large;
        const double cx = r[0] * std::cos(a0);
        const double cy = r[0] * std::sin(a0);
        for (int m = 0; m < n_mid; ++m) {
            const double a1 = a0 + tau * m / n_mid;
            const double mx = cx + r[1] * std::cos(a1);
            const double my = cy + r[1] * std::sin(a1);
            for (int s = 0; s < n_small; ++s) {
                const double a2 = a1 + tau * s / n_small;
                const double sx = mx + r[2] * std::cos(a2);
                const double sy = my + r[2] * std::sin(a2);
                const int l1 = c * n_mid + m;
                const int l2 = l1 * n_small + s;
                for (int p = 0; p < per_small; ++p) {
                    values.push_back(sx + spec.noise_sd * rng.normal());
                    values.push_back(sy + spec.noise_sd * rng.normal());
                    out.labels[0].values.push_back(c);
                    out.labels[1].values.push_back(l1);
                    out.labels[2].values.push_back(l2);
                }
            }
        }
    }
    for (auto& col : out.labels) {
        const int k = *std::max_element(col.values.begin(), col.values.end()) + 1;
        for (int v = 0; v < k; ++v) {
            col.names.push_back(std::to_string(v));
        }
    }
    out.X = DataMatrix(n, 2, std::move(values));
    return out;
}

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        cells.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
        if (pos == std::string::npos) {
            break;
        }
        start = pos + 1;
    }
    return cells;
}

bool parse_real(const std::string& s, double& out) {
    if (s.empty()) {
        return false;
    }
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (*first == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

bool parse_int(const std::string& s, long long& out) {
    if (s.empty()) {
        return false;
    }
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

LabelColumn factorize(std::string name, const std::vector<std::string>& raw) {
    LabelColumn col;
    col.name = std::move(name);
    std::vector<std::string> uniq(raw);
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    long long dummy = 0;
    const bool numeric = std::all_of(uniq.begin(), uniq.end(), [&](const std::string& s) { return parse_int(s, dummy); });
    if (numeric) {
        std::stable_sort(uniq.begin(), uniq.end(), [](const std::string& a, const std::string& b) {
            return std::stoll(a) < std::stoll(b);
        });
    }
    std::map<std::string, int> code;
    for (const auto& s : uniq) {
        code.emplace(s, static_cast<int>(code.size()));
    }
    col.names = uniq;
    col.values.reserve(raw.size());
    for (const auto& s : raw) {
        col.values.push_back(code.at(s));
    }
    return col;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError(path.string() + ": cannot open for reading");
    }
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError(path.string() + ": cannot open for writing");
    }
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) {
        throw IoError(path.string() + ": write failed");
    }
}

}  // namespace

std::vector<std::string> read_csv_header(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError(path.string() + ": empty file");
    }
    return split_line(line);
}

LabeledDataset load_csv(const std::filesystem::path& path, bool has_header, const std::vector<std::string>& label_cols) {
    auto in = open_in(path);
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        auto cells = split_line(line);
        if (has_header && header.empty()) {
            header = std::move(cells);
            continue;
        }
        const std::size_t expected = header.empty() ? (rows.empty() ? cells.size() : rows.front().size()) : header.size();
        if (cells.size() != expected) {
            throw IoError(path.string() + ": line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                          " fields, expected " + std::to_string(expected));
        }
        rows.push_back(std::move(cells));
    }
    if (rows.empty()) {
        throw IoError(path.string() + ": no data rows");
    }
    const std::size_t ncols = rows.front().size();
    if (header.empty()) {
        for (std::size_t j = 0; j < ncols; ++j) {
            header.push_back(std::to_string(j));
        }
    }

    std::vector<bool> is_label(ncols, false);
    std::vector<std::size_t> label_order;
    for (const auto& spec : label_cols) {
        auto it = std::find(header.begin(), header.end(), spec);
        std::size_t idx = ncols;
        if (it != header.end()) {
            idx = static_cast<std::size_t>(it - header.begin());
        } else {
            long long v = 0;
            if (parse_int(spec, v) && v >= 0 && static_cast<std::size_t>(v) < ncols) {
                idx = static_cast<std::size_t>(v);
            }
        }
        if (idx == ncols) {
            throw IoError(path.string() + ": label column '" + spec + "' not found");
        }
        if (!is_label[idx]) {
            is_label[idx] = true;
            label_order.push_back(idx);
        }
    }

    LabeledDataset out;
    std::vector<std::size_t> feature_idx;
    for (std::size_t j = 0; j < ncols; ++j) {
        if (!is_label[j]) {
            feature_idx.push_back(j);
            out.feature_names.push_back(header[j]);
        }
    }
    if (feature_idx.empty()) {
        throw IoError(path.string() + ": no feature columns");
    }
    std::vector<double> values;
    values.reserve(rows.size() * feature_idx.size());
    const std::size_t first_data_line = has_header ? 2 : 1;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (auto j : feature_idx) {
            double v = 0.0;
            if (!parse_real(rows[i][j], v)) {
                throw IoError(path.string() + ": data row " + std::to_string(i + 1) + " (line >= " +
                              std::to_string(i + first_data_line) + "), column '" + header[j] +
                              "': cannot parse '" + rows[i][j] + "' as a finite real");
            }
            values.push_back(v);
        }
    }
    out.X = DataMatrix(rows.size(), feature_idx.size(), std::move(values));
    for (auto j : label_order) {
        std::vector<std::string> raw;
        raw.reserve(rows.size());
        for (const auto& r : rows) {
            raw.push_back(r[j]);
        }
        out.labels.push_back(factorize(header[j], raw));
    }
    return out;
}

std::string format_real(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) {
        throw IoError("format_real: conversion failed");
    }
    return std::string(buf, ptr);
}

void save_csv(const std::filesystem::path& path, const LabeledDataset& data) {
    auto out = open_out(path);
    std::string line;
    for (std::size_t j = 0; j < data.X.cols(); ++j) {
        line += (j ? "," : "") + (j < data.feature_names.size() ? data.feature_names[j] : "x" + std::to_string(j));
    }
    for (const auto& col : data.labels) {
        line += "," + col.name;
    }
    out << line << '\n';
    for (std::size_t i = 0; i < data.X.rows(); ++i) {
        line.clear();
        for (std::size_t j = 0; j < data.X.cols(); ++j) {
            if (j) {
                line += ',';
            }
            line += format_real(data.X(i, j));
        }
        for (const auto& col : data.labels) {
            line += ',';
            line += col.names.at(static_cast<std::size_t>(col.values.at(i)));
        }
        out << line << '\n';
    }
    finish(out, path);
}

std::filesystem::path stars_path_for(const std::filesystem::path& path) {
    return std::filesystem::path(path.string() + ".stars.csv");
}

void save_embedding_csv(const std::filesystem::path& path, const DataMatrix& Y, const std::vector<int>* labels,
                        const DataMatrix* stars, const std::vector<std::uint32_t>* assignment,
                        const std::optional<std::filesystem::path>& stars_out) {
    if (labels && labels->size() != Y.rows()) {
        throw InvalidArgument("save_embedding_csv: label count != N");
    }
    if (assignment && assignment->size() != Y.rows()) {
        throw InvalidArgument("save_embedding_csv: assignment count != N");
    }
    if (stars && stars->cols() != Y.cols()) {
        throw InvalidArgument("save_embedding_csv: stars and points differ in dimension");
    }
    {
        auto out = open_out(path);
        std::string line;
        for (std::size_t j = 0; j < Y.cols(); ++j) {
            line += (j ? ",y" : "y") + std::to_string(j);
        }
        if (labels) {
            line += ",label";
        }
        if (assignment) {
            line += ",anchor";
        }
        out << line << '\n';
        for (std::size_t i = 0; i < Y.rows(); ++i) {
            line.clear();
            for (std::size_t j = 0; j < Y.cols(); ++j) {
                if (j) {
                    line += ',';
                }
                line += format_real(Y(i, j));
            }
            if (labels) {
                line += ',' + std::to_string((*labels)[i]);
            }
            if (assignment) {
                line += ',' + std::to_string((*assignment)[i]);
            }
            out << line << '\n';
        }
        finish(out, path);
    }
    if (stars) {
        const auto spath = stars_out.value_or(stars_path_for(path));
        auto out = open_out(spath);
        std::string line;
        for (std::size_t j = 0; j < stars->cols(); ++j) {
            line += (j ? ",s" : "s") + std::to_string(j);
        }
        out << line << ",anchor_id\n";
        for (std::size_t c = 0; c < stars->rows(); ++c) {
            line.clear();
            for (std::size_t j = 0; j < stars->cols(); ++j) {
                if (j) {
                    line += ',';
                }
                line += format_real((*stars)(c, j));
            }
            out << line << ',' << c << '\n';
        }
        finish(out, spath);
    }
}

}  // namespace starmap
